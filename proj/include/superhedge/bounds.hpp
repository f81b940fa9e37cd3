#pragma once

#include <utility>

#include "superhedge/model.hpp"

namespace superhedge {

/// Price of a European payoff in the binomial sub-game restricted to the
/// pair (negatives()[pair.neg], positives()[pair.pos]).
double binomial_price(const GameSpec& game, PairIndex pair, const PayoffSpec& payoff);

struct BinomialBound {
  double bound = 0.0;
  PairIndex pair;
};

/// max over pairs of binomial_price; a lower bound for the upper price.
BinomialBound binomial_lower_bound(const GameSpec& game, const PayoffSpec& payoff);
/// min over pairs of binomial_price; an upper bound for the lower price.
BinomialBound binomial_upper_bound_on_lower(const GameSpec& game, const PayoffSpec& payoff);

/// Binomial model on the two outermost / innermost moves.
PairIndex outermost_pair(const MoveSpace& moves);
PairIndex innermost_pair(const MoveSpace& moves);

struct NestedPrices {
  double outer_lower = 0.0;
  double inner_lower = 0.0;
  double inner_upper = 0.0;
  double outer_upper = 0.0;
  /// outer_lower <= inner_lower <= inner_upper <= outer_upper within tolerance.
  bool ordered = false;
};

/// Upper and lower prices under two nested move spaces. Throws
/// ValidationError unless inner is a subset of outer.
NestedPrices nested_compare(const MoveSpace& inner, const MoveSpace& outer, int rounds, double payoff_scale,
                            const PayoffSpec& payoff, double tolerance = 1e-9);

/// Split of a piecewise-linear payoff into affine + positive-weight hinges
/// (convex) and negative-weight hinges (concave).
std::pair<PiecewiseLinear, PiecewiseLinear> split_convex_concave(const PiecewiseLinear& f);

/// Second-difference check on a 1001-point grid over [lo, hi].
bool is_convex_on(const PayoffSpec& f, double lo, double hi);
bool is_concave_on(const PayoffSpec& f, double lo, double hi);

/// Ē(f1) + Ē(f2) for convex f1 and concave f2, each from its closed form.
/// Throws ValidationError if the sample check on the reachable range fails.
double convex_concave_bound(const GameSpec& game, const PayoffSpec& convex_part, const PayoffSpec& concave_part);

}  // namespace superhedge
