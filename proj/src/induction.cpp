#include "superhedge/induction.hpp"

#include <algorithm>
#include <limits>

#include "superhedge/errors.hpp"
#include "superhedge/singlestep.hpp"

namespace superhedge {
namespace {

double scaled_point(std::int64_t units, std::int64_t denominator, double scale) {
  return scale * (static_cast<double>(units) / static_cast<double>(denominator));
}

void require_european(const PayoffSpec& payoff) {
  if (!payoff.is_european()) {
    throw ValidationError("path-dependent payoff cannot be priced on the collapsed lattice; use price_path_dependent");
  }
}

/// Reachable sums per round and, for rounds < N, the index of each child in
/// the next level (state-major, k children per state).
struct Lattice {
  std::vector<std::vector<std::int64_t>> sums;
  std::vector<std::vector<int>> children;
};

Lattice build_lattice(const MoveSpace& moves, int rounds) {
  const auto& units = moves.lattice_units();
  const std::size_t k = units.size();
  Lattice lat;
  lat.sums.resize(static_cast<std::size_t>(rounds) + 1);
  lat.children.resize(static_cast<std::size_t>(rounds));
  lat.sums[0] = {0};
  for (int n = 0; n < rounds; ++n) {
    const auto& cur = lat.sums[n];
    auto& next = lat.sums[n + 1];
    next.reserve(cur.size() * k);
    for (std::int64_t s : cur) {
      for (std::int64_t u : units) next.push_back(s + u);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());

    auto& child = lat.children[n];
    child.resize(cur.size() * k);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      for (std::size_t a = 0; a < k; ++a) {
        auto it = std::lower_bound(next.begin(), next.end(), cur[i] + units[a]);
        child[i * k + a] = static_cast<int>(it - next.begin());
      }
    }
  }
  return lat;
}

std::vector<double> terminal_values(const GameSpec& game, const PayoffSpec& payoff,
                                    const std::vector<std::int64_t>& sums) {
  std::vector<double> values(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) {
    values[i] = evaluate_payoff(payoff, scaled_point(sums[i], game.moves.denominator(), game.payoff_scale));
  }
  return values;
}

double slope(const StepKernel::Pair& p, std::span<const double> values) {
  return (values[p.pos_move] - values[p.neg_move]) / p.spread;
}

// With a+ = 0 every chord through 0 prices at f(0), so the chord of the chosen
// pair need not support the envelope. Take the tightest chord to 0 instead.
double hedge_slope(const MoveSpace& moves, const StepKernel::Pair& p, std::span<const double> values, Side side) {
  double m = slope(p, values);
  if (!moves.positive(p.index.pos).is_zero()) return m;
  for (int i = 0; i < moves.negative_count(); ++i) {
    const int a = moves.index_of_negative(i);
    double s = (values[p.pos_move] - values[a]) / -moves.negative(i).to_double();
    m = side == Side::Upper ? std::min(m, s) : std::max(m, s);
  }
  return m;
}

Rational exact_sum(std::int64_t units, std::int64_t denominator) { return Rational(units, denominator); }

}  // namespace

PruneSchedule::PruneSchedule(int period_) : period(period_) {
  if (period < 1) throw ValidationError("prune period must be >= 1");
}

std::uint64_t leaf_count(int k, int rounds) {
  std::uint64_t count = 1;
  for (int n = 0; n < rounds; ++n) {
    if (count > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(k)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= static_cast<std::uint64_t>(k);
  }
  return count;
}

double terminal_payoff(const GameSpec& game, const PayoffSpec& payoff, std::span<const int> path) {
  const auto& moves = game.moves;
  if (payoff.is_european()) {
    std::int64_t units = 0;
    for (int a : path) units += moves.lattice_units()[static_cast<std::size_t>(a)];
    return evaluate_payoff(payoff, scaled_point(units, moves.denominator(), game.payoff_scale));
  }
  std::vector<double> scaled;
  scaled.reserve(path.size());
  for (int a : path) scaled.push_back(game.payoff_scale * moves.moves()[static_cast<std::size_t>(a)].to_double());
  return payoff.evaluate_path(scaled);
}

std::vector<LatticeLevel> lattice_levels(const GameSpec& game, const PayoffSpec& payoff, Side side) {
  require_european(payoff);
  const int rounds = game.rounds;
  const std::size_t k = static_cast<std::size_t>(game.moves.size());
  const StepKernel kernel(game.moves);
  Lattice lat = build_lattice(game.moves, rounds);

  std::vector<LatticeLevel> levels(static_cast<std::size_t>(rounds) + 1);
  levels[rounds] = {rounds, lat.sums[rounds], terminal_values(game, payoff, lat.sums[rounds])};
  std::vector<double> local(k);
  for (int n = rounds - 1; n >= 0; --n) {
    const auto& next = levels[n + 1].values;
    const auto& child = lat.children[n];
    LatticeLevel level{n, lat.sums[n], std::vector<double>(lat.sums[n].size())};
    for (std::size_t i = 0; i < level.sums.size(); ++i) {
      for (std::size_t a = 0; a < k; ++a) local[a] = next[child[i * k + a]];
      level.values[i] = kernel.best(local, side).price;
    }
    levels[n] = std::move(level);
  }
  return levels;
}

PriceResult price_european(const GameSpec& game, const PayoffSpec& payoff, Side side,
                           const PricingOptions& options) {
  require_european(payoff);
  const int rounds = game.rounds;
  const std::int64_t denominator = game.moves.denominator();
  const std::size_t k = static_cast<std::size_t>(game.moves.size());
  const StepKernel kernel(game.moves);
  Lattice lat = build_lattice(game.moves, rounds);

  PriceResult result;
  result.side = side;
  result.keying = NodeKeying::Lattice;
  result.rounds = rounds;

  std::vector<double> next = terminal_values(game, payoff, lat.sums[rounds]);
  if (options.record_nodes) {
    for (std::size_t i = 0; i < next.size(); ++i) {
      result.nodes.emplace(NodeKey{rounds, exact_sum(lat.sums[rounds][i], denominator), {}, std::nullopt},
                           NodeRecord{next[i], 0.0, std::nullopt});
    }
  }

  std::vector<double> local(k);
  for (int n = rounds - 1; n >= 0; --n) {
    const auto& sums = lat.sums[n];
    const auto& child = lat.children[n];
    std::vector<double> cur(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) {
      for (std::size_t a = 0; a < k; ++a) local[a] = next[child[i * k + a]];
      StepResult step = kernel.best(local, side);
      cur[i] = step.price;
      if (options.record_nodes) {
        const auto& pair = kernel.pair(step.best_pair);
        result.nodes.emplace(NodeKey{n, exact_sum(sums[i], denominator), {}, std::nullopt},
                             NodeRecord{step.price, hedge_slope(game.moves, pair, local, side), step.node});
      }
    }
    next = std::move(cur);
  }
  result.price = next.front();
  return result;
}

PriceResult price_pruned(const GameSpec& game, const PayoffSpec& payoff, PruneSchedule schedule, Side side,
                         const PricingOptions& options) {
  require_european(payoff);
  const int rounds = game.rounds;
  const int period = schedule.period;
  const std::int64_t denominator = game.moves.denominator();
  const std::size_t k = static_cast<std::size_t>(game.moves.size());
  const StepKernel kernel(game.moves);
  const std::size_t pair_count = kernel.pairs().size();
  Lattice lat = build_lattice(game.moves, rounds);

  // Rounds strictly inside the game that do not re-maximize hold one value
  // per (state, inherited pair).
  auto carries_pair = [&](int n) { return n < rounds && n % period != 0; };

  PriceResult result;
  result.side = side;
  result.keying = NodeKeying::PrunedLattice;
  result.rounds = rounds;
  result.prune_period = period;

  std::vector<double> next = terminal_values(game, payoff, lat.sums[rounds]);
  if (options.record_nodes) {
    for (std::size_t i = 0; i < next.size(); ++i) {
      result.nodes.emplace(NodeKey{rounds, exact_sum(lat.sums[rounds][i], denominator), {}, std::nullopt},
                           NodeRecord{next[i], 0.0, std::nullopt});
    }
  }

  std::vector<double> local(k);
  auto gather = [&](std::size_t i, const std::vector<int>& child, bool child_carries, std::size_t pair_slot) {
    for (std::size_t a = 0; a < k; ++a) {
      std::size_t c = static_cast<std::size_t>(child[i * k + a]);
      local[a] = child_carries ? next[c * pair_count + pair_slot] : next[c];
    }
  };

  for (int n = rounds - 1; n >= 0; --n) {
    const auto& sums = lat.sums[n];
    const auto& child = lat.children[n];
    const bool child_carries = carries_pair(n + 1);
    std::vector<double> cur;

    if (!carries_pair(n)) {
      cur.resize(sums.size());
      for (std::size_t i = 0; i < sums.size(); ++i) {
        std::size_t best_slot = 0;
        double best_value = 0.0;
        double best_slope = 0.0;
        for (std::size_t p = 0; p < pair_count; ++p) {
          gather(i, child, child_carries, p);
          const auto& pair = kernel.pairs()[p];
          double v = kernel.combine(pair, local);
          if (p == 0 || (side == Side::Upper ? v > best_value : v < best_value)) {
            best_value = v;
            best_slot = p;
            best_slope = hedge_slope(game.moves, pair, local, side);
          }
        }
        cur[i] = best_value;
        if (options.record_nodes) {
          result.nodes.emplace(NodeKey{n, exact_sum(sums[i], denominator), {}, std::nullopt},
                               NodeRecord{best_value, best_slope, kernel.pairs()[best_slot].node});
        }
      }
    } else {
      cur.resize(sums.size() * pair_count);
      for (std::size_t i = 0; i < sums.size(); ++i) {
        for (std::size_t p = 0; p < pair_count; ++p) {
          gather(i, child, child_carries, p);
          const auto& pair = kernel.pairs()[p];
          double v = kernel.combine(pair, local);
          cur[i * pair_count + p] = v;
          if (options.record_nodes) {
            result.nodes.emplace(NodeKey{n, exact_sum(sums[i], denominator), {}, pair.index},
                                 NodeRecord{v, slope(pair, local), pair.node});
          }
        }
      }
    }
    next = std::move(cur);
  }
  result.price = next.front();
  return result;
}

PriceResult price_path_dependent(const GameSpec& game, const PayoffSpec& payoff, Side side,
                                 const PricingOptions& options) {
  const int rounds = game.rounds;
  const int k = game.moves.size();
  const std::uint64_t leaves = leaf_count(k, rounds);
  if (leaves > options.budget_leaves) {
    throw BudgetError("full game tree exceeds leaf budget", leaves, options.budget_leaves);
  }
  const StepKernel kernel(game.moves);
  const auto& units = game.moves.lattice_units();
  const std::int64_t denominator = game.moves.denominator();

  PriceResult result;
  result.side = side;
  result.keying = NodeKeying::Path;
  result.rounds = rounds;

  std::vector<int> path;
  path.reserve(static_cast<std::size_t>(rounds));
  std::vector<std::vector<double>> scratch(static_cast<std::size_t>(rounds), std::vector<double>(k));

  auto visit = [&](auto&& self, std::int64_t sum_units) -> double {
    const int n = static_cast<int>(path.size());
    if (n == rounds) {
      double v = terminal_payoff(game, payoff, path);
      if (options.record_nodes) {
        result.nodes.emplace(NodeKey{n, exact_sum(sum_units, denominator), path, std::nullopt},
                             NodeRecord{v, 0.0, std::nullopt});
      }
      return v;
    }
    auto& local = scratch[static_cast<std::size_t>(n)];
    for (int a = 0; a < k; ++a) {
      path.push_back(a);
      local[a] = self(self, sum_units + units[static_cast<std::size_t>(a)]);
      path.pop_back();
    }
    StepResult step = kernel.best(local, side);
    if (options.record_nodes) {
      result.nodes.emplace(NodeKey{n, exact_sum(sum_units, denominator), path, std::nullopt},
                           NodeRecord{step.price, hedge_slope(game.moves, kernel.pair(step.best_pair), local, side), step.node});
    }
    return step.price;
  };
  result.price = visit(visit, 0);
  return result;
}

NodeKey root_key() { return NodeKey{}; }

NodeKey child_key(const PriceResult& result, const MoveSpace& moves, const NodeKey& parent, int move_index) {
  NodeKey key;
  key.round = parent.round + 1;
  key.sum = parent.sum + moves.moves().at(static_cast<std::size_t>(move_index));
  if (result.keying == NodeKeying::Path) {
    key.path = parent.path;
    key.path.push_back(move_index);
  } else if (result.keying == NodeKeying::PrunedLattice) {
    if (key.round < result.rounds && key.round % result.prune_period != 0) {
      key.inherited = result.measure(parent).pair;
    }
  }
  return key;
}

std::vector<PathProbability> extract_measure(const PriceResult& result, const GameSpec& game,
                                             std::uint64_t budget_paths) {
  if (!result.has_nodes()) throw ValidationError("price result has no recorded nodes");
  const MoveSpace& moves = game.moves;
  std::vector<PathProbability> support;
  std::vector<int> path;

  auto visit = [&](auto&& self, const NodeKey& key, double probability) -> void {
    if (key.round == result.rounds) {
      if (support.size() >= budget_paths) {
        throw BudgetError("extremal measure support exceeds budget", support.size() + 1, budget_paths);
      }
      support.push_back({path, probability});
      return;
    }
    const RiskNeutralNode& node = result.measure(key);
    const int neg_move = moves.index_of_negative(node.pair.neg);
    const int pos_move = moves.index_of_positive(node.pair.pos);
    if (!node.prob_neg.is_zero()) {
      path.push_back(neg_move);
      self(self, child_key(result, moves, key, neg_move), probability * node.p_neg());
      path.pop_back();
    }
    if (!node.prob_pos.is_zero()) {
      path.push_back(pos_move);
      self(self, child_key(result, moves, key, pos_move), probability * node.p_pos());
      path.pop_back();
    }
  };
  visit(visit, root_key(), 1.0);
  return support;
}

}  // namespace superhedge
