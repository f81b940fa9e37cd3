#include "superhedge/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "superhedge/errors.hpp"
#include "superhedge/induction.hpp"

namespace superhedge {
namespace {

constexpr int kConvexitySamples = 1001;

void require_european(const PayoffSpec& payoff) {
  if (!payoff.is_european()) throw ValidationError("binomial bounds need a European payoff");
}

BinomialBound extreme_pair(const GameSpec& game, const PayoffSpec& payoff, Side side) {
  BinomialBound best{0.0, {0, 0}};
  bool first = true;
  for (int i = 0; i < game.moves.negative_count(); ++i) {
    for (int j = 0; j < game.moves.positive_count(); ++j) {
      double v = binomial_price(game, {i, j}, payoff);
      if (first || (side == Side::Upper ? v > best.bound : v < best.bound)) {
        best = {v, {i, j}};
        first = false;
      }
    }
  }
  return best;
}

double max_second_difference_violation(const PayoffSpec& f, double lo, double hi, double sign) {
  if (!(hi > lo)) return 0.0;
  const double h = (hi - lo) / (kConvexitySamples - 1);
  std::vector<double> y(kConvexitySamples);
  double magnitude = 1.0;
  for (int i = 0; i < kConvexitySamples; ++i) {
    y[static_cast<std::size_t>(i)] = evaluate_payoff(f, lo + h * i);
    magnitude = std::max(magnitude, std::abs(y[static_cast<std::size_t>(i)]));
  }
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    double d2 = sign * (y[i - 1] - 2.0 * y[i] + y[i + 1]);
    worst = std::min(worst, d2 / magnitude);
  }
  return -worst;
}

}  // namespace

double binomial_price(const GameSpec& game, PairIndex pair, const PayoffSpec& payoff) {
  require_european(payoff);
  const MoveSpace& moves = game.moves;
  const RiskNeutralNode node = RiskNeutralNode::for_pair(moves, pair);
  const double p_neg = node.p_neg();
  const double p_pos = node.p_pos();
  const std::int64_t u_neg = moves.lattice_units()[static_cast<std::size_t>(moves.index_of_negative(pair.neg))];
  const std::int64_t u_pos = moves.lattice_units()[static_cast<std::size_t>(moves.index_of_positive(pair.pos))];
  const int rounds = game.rounds;

  // weights[h] = P(h negative moves in N rounds), built by repeated
  // two-point convolution.
  std::vector<double> weights{1.0};
  weights.reserve(static_cast<std::size_t>(rounds) + 1);
  for (int n = 0; n < rounds; ++n) {
    weights.push_back(0.0);
    for (std::size_t h = weights.size() - 1; h > 0; --h) weights[h] = weights[h] * p_pos + weights[h - 1] * p_neg;
    weights[0] *= p_pos;
  }

  double price = 0.0;
  for (int h = 0; h <= rounds; ++h) {
    const double w = weights[static_cast<std::size_t>(h)];
    if (w == 0.0) continue;
    std::int64_t units = h * u_neg + (rounds - h) * u_pos;
    double s = game.payoff_scale * (static_cast<double>(units) / static_cast<double>(moves.denominator()));
    price += w * evaluate_payoff(payoff, s);
  }
  return price;
}

BinomialBound binomial_lower_bound(const GameSpec& game, const PayoffSpec& payoff) {
  return extreme_pair(game, payoff, Side::Upper);
}

BinomialBound binomial_upper_bound_on_lower(const GameSpec& game, const PayoffSpec& payoff) {
  return extreme_pair(game, payoff, Side::Lower);
}

PairIndex outermost_pair(const MoveSpace& moves) {
  return {moves.negative_count() - 1, moves.positive_count() - 1};
}

PairIndex innermost_pair(const MoveSpace&) { return {0, 0}; }

NestedPrices nested_compare(const MoveSpace& inner, const MoveSpace& outer, int rounds, double payoff_scale,
                            const PayoffSpec& payoff, double tolerance) {
  if (!inner.is_subset_of(outer)) {
    throw ValidationError("inner move space {" + inner.to_string() + "} is not a subset of {" + outer.to_string() +
                          "}");
  }
  PricingOptions quiet;
  quiet.record_nodes = false;
  GameSpec g_inner(inner, rounds, payoff_scale);
  GameSpec g_outer(outer, rounds, payoff_scale);
  NestedPrices out;
  out.outer_lower = price_european(g_outer, payoff, Side::Lower, quiet).price;
  out.inner_lower = price_european(g_inner, payoff, Side::Lower, quiet).price;
  out.inner_upper = price_european(g_inner, payoff, Side::Upper, quiet).price;
  out.outer_upper = price_european(g_outer, payoff, Side::Upper, quiet).price;
  out.ordered = out.outer_lower <= out.inner_lower + tolerance && out.inner_lower <= out.inner_upper + tolerance &&
                out.inner_upper <= out.outer_upper + tolerance;
  return out;
}

std::pair<PiecewiseLinear, PiecewiseLinear> split_convex_concave(const PiecewiseLinear& f) {
  const auto& pts = f.points;
  // Slope change at each breakpoint.
  std::vector<double> kinks(pts.size());
  double prev_slope = f.left_slope;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double next_slope =
        i + 1 < pts.size() ? (pts[i + 1].second - pts[i].second) / (pts[i + 1].first - pts[i].first) : f.right_slope;
    kinks[i] = next_slope - prev_slope;
    prev_slope = next_slope;
  }

  PiecewiseLinear convex{{}, f.left_slope, f.left_slope};
  PiecewiseLinear concave{{}, 0.0, 0.0};
  for (double c : kinks) (c > 0.0 ? convex.right_slope : concave.right_slope) += c;

  for (const auto& [x, y] : pts) {
    double up = 0.0;
    double down = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      double h = std::max(0.0, x - pts[i].first) * kinks[i];
      (kinks[i] > 0.0 ? up : down) += h;
    }
    convex.points.emplace_back(x, pts.front().second + f.left_slope * (x - pts.front().first) + up);
    concave.points.emplace_back(x, down);
  }
  return {std::move(convex), std::move(concave)};
}

bool is_convex_on(const PayoffSpec& f, double lo, double hi) {
  return max_second_difference_violation(f, lo, hi, 1.0) <= 1e-12;
}

bool is_concave_on(const PayoffSpec& f, double lo, double hi) {
  return max_second_difference_violation(f, lo, hi, -1.0) <= 1e-12;
}

double convex_concave_bound(const GameSpec& game, const PayoffSpec& convex_part, const PayoffSpec& concave_part) {
  require_european(convex_part);
  require_european(concave_part);
  const MoveSpace& moves = game.moves;
  const double lo = game.payoff_scale * game.rounds * moves.moves().front().to_double();
  const double hi = game.payoff_scale * game.rounds * moves.moves().back().to_double();
  if (!is_convex_on(convex_part, lo, hi)) throw ValidationError("convex part fails the convexity check");
  if (!is_concave_on(concave_part, lo, hi)) throw ValidationError("concave part fails the concavity check");

  double upper_convex = binomial_price(game, outermost_pair(moves), convex_part);
  double upper_concave = moves.positive(0).is_zero() ? evaluate_payoff(concave_part, 0.0)
                                                     : binomial_price(game, innermost_pair(moves), concave_part);
  return upper_convex + upper_concave;
}

}  // namespace superhedge
