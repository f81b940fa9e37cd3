#pragma once

#include <span>
#include <vector>

#include "superhedge/model.hpp"

namespace superhedge {

struct StepResult {
  double price = 0.0;
  PairIndex best_pair;
  RiskNeutralNode node;
};

/// Precomputed two-point weights for every (negative, nonnegative) pair of a
/// move space. The weights are formed exactly in rationals and converted to
/// double once.
class StepKernel {
 public:
  struct Pair {
    PairIndex index;
    int neg_move = 0;  // ascending move index of a_i-
    int pos_move = 0;  // ascending move index of a_j+
    double w_neg = 0.0;
    double w_pos = 0.0;
    double spread = 0.0;  // a_j+ - a_i-
    RiskNeutralNode node;
  };

  explicit StepKernel(const MoveSpace& moves);

  const std::vector<Pair>& pairs() const { return pairs_; }
  const Pair& pair(PairIndex index) const;

  /// w_neg * f(a_i-) + w_pos * f(a_j+); `values` is indexed by ascending move.
  double combine(const Pair& p, std::span<const double> values) const {
    return p.w_neg * values[p.neg_move] + p.w_pos * values[p.pos_move];
  }

  /// Max (Upper) or min (Lower) over pairs; ties resolve to the
  /// lexicographically smallest pair.
  StepResult best(std::span<const double> values, Side side) const;

 private:
  int positive_count_;
  std::vector<Pair> pairs_;
};

/// max over pairs of (a_j+ f(a_i-) - a_i- f(a_j+)) / (a_j+ - a_i-).
/// `values` holds f at every move in ascending move order.
StepResult upper_price_step(const MoveSpace& moves, std::span<const double> values);

/// min over pairs of the same quotient; equals -upper_price_step(moves, -values).
StepResult lower_price_step(const MoveSpace& moves, std::span<const double> values);

}  // namespace superhedge
