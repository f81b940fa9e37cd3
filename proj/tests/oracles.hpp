#pragma once

// Reference computations written directly from the definitions, sharing no
// code with the library beyond payoff evaluation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Fn = std::function<double(double)>;

/// max (upper) or min (lower) over every (x < 0, y >= 0) of the two-point
/// zero-mean expectation of the given values.
inline double step(const std::vector<double>& moves, const std::vector<double>& values, bool upper) {
  double best = upper ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < moves.size(); ++i) {
    if (!(moves[i] < 0)) continue;
    for (std::size_t j = 0; j < moves.size(); ++j) {
      if (!(moves[j] >= 0)) continue;
      double x = moves[i];
      double y = moves[j];
      double v = (y * values[i] - x * values[j]) / (y - x);
      best = upper ? std::max(best, v) : std::min(best, v);
    }
  }
  return best;
}

/// Full-tree recursion on paths; `terminal` receives the unscaled move
/// sequence.
inline double tree_price(const std::vector<double>& moves, int rounds,
                         const std::function<double(const std::vector<double>&)>& terminal, bool upper) {
  std::vector<double> path;
  std::function<double()> go = [&]() -> double {
    if (static_cast<int>(path.size()) == rounds) return terminal(path);
    std::vector<double> values;
    for (double m : moves) {
      path.push_back(m);
      values.push_back(go());
      path.pop_back();
    }
    return step(moves, values, upper);
  };
  return go();
}

/// European price: f(scale * S_N).
inline double european_price(const std::vector<double>& moves, int rounds, double scale, const Fn& f, bool upper) {
  return tree_price(
      moves, rounds,
      [&](const std::vector<double>& p) {
        double s = 0;
        for (double x : p) s += x;
        return f(scale * s);
      },
      upper);
}

/// Binomial price by enumerating all 2^N up/down sequences.
inline double binomial_enumerated(double down, double up, int rounds, double scale, const Fn& f) {
  // Extended precision keeps the 2^N-term sum accurate to a few ulps.
  const long double p_down = static_cast<long double>(up) / (static_cast<long double>(up) - down);
  const long double p_up = -static_cast<long double>(down) / (static_cast<long double>(up) - down);
  long double total = 0.0L;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << rounds); ++mask) {
    long double prob = 1.0L;
    double s = 0.0;
    for (int n = 0; n < rounds; ++n) {
      bool is_down = (mask >> n) & 1U;
      prob *= is_down ? p_down : p_up;
      s += is_down ? down : up;
    }
    total += prob * f(scale * s);
  }
  return static_cast<double>(total);
}

}  // namespace oracle
