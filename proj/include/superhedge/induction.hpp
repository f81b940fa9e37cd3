#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "superhedge/model.hpp"

namespace superhedge {

inline constexpr std::uint64_t kDefaultLeafBudget = 10'000'000;

struct PricingOptions {
  /// Keep per-node values, strategies and measures in the result.
  bool record_nodes = true;
  /// Maximum k^N for full-tree pricing.
  std::uint64_t budget_leaves = kDefaultLeafBudget;
};

/// Re-maximize at rounds n with n % period == 0, reuse the inherited pair
/// otherwise. period == 1 is the exact price.
struct PruneSchedule {
  explicit PruneSchedule(int period);
  int period;
};

/// One level of the collapsed lattice: the distinct sums S_n (in units of
/// 1/denominator) and the node values.
struct LatticeLevel {
  int round = 0;
  std::vector<std::int64_t> sums;
  std::vector<double> values;
};

/// Backward induction over the lattice collapsed on S_n. Throws
/// ValidationError for path-dependent payoffs.
PriceResult price_european(const GameSpec& game, const PayoffSpec& payoff, Side side,
                           const PricingOptions& options = {});

/// Backward induction over the full game tree keyed by partial paths. Throws
/// BudgetError when k^N exceeds options.budget_leaves.
PriceResult price_path_dependent(const GameSpec& game, const PayoffSpec& payoff, Side side,
                                 const PricingOptions& options = {});

/// Lattice induction with dynamically restricted maximization. For the Upper
/// side the result never exceeds price_european.
PriceResult price_pruned(const GameSpec& game, const PayoffSpec& payoff, PruneSchedule schedule,
                         Side side = Side::Upper, const PricingOptions& options = {});

/// The collapsed lattice levels 0..N with node values (diagnostics, dumps).
std::vector<LatticeLevel> lattice_levels(const GameSpec& game, const PayoffSpec& payoff, Side side);

/// Payoff of the path given as ascending move indices.
double terminal_payoff(const GameSpec& game, const PayoffSpec& payoff, std::span<const int> path);

/// Keys of the root and of the child reached by `move_index` (ascending).
NodeKey root_key();
NodeKey child_key(const PriceResult& result, const MoveSpace& moves, const NodeKey& parent, int move_index);

struct PathProbability {
  std::vector<int> path;  // ascending move indices
  double probability = 0.0;
};

/// Support of the extremal product measure: each path's probability is the
/// product of the per-node two-point conditionals. Paths of zero probability
/// are omitted. Requires recorded nodes.
std::vector<PathProbability> extract_measure(const PriceResult& result, const GameSpec& game,
                                             std::uint64_t budget_paths = kDefaultLeafBudget);

/// k^N, saturating at UINT64_MAX.
std::uint64_t leaf_count(int k, int rounds);

}  // namespace superhedge
