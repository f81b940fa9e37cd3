#include "superhedge/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "superhedge/bounds.hpp"
#include "superhedge/errors.hpp"
#include "superhedge/lp.hpp"

namespace superhedge {
namespace {

const NodeRecord& lookup(const PriceResult& result, const NodeKey& key) {
  auto it = result.nodes.find(key);
  if (it == result.nodes.end()) {
    std::ostringstream os;
    os << "strategy has no node at round " << key.round << ", S = " << key.sum;
    throw ValidationError(os.str());
  }
  return it->second;
}

std::vector<Rational> to_moves(const MoveSpace& moves, const std::vector<int>& path) {
  std::vector<Rational> out;
  out.reserve(path.size());
  for (int a : path) out.push_back(moves.moves()[static_cast<std::size_t>(a)]);
  return out;
}

nlohmann::json path_json(const std::vector<Rational>& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const Rational& r : path) j.push_back(r.to_string());
  return j;
}

// splitmix64 finalizer: decorrelates (seed, trial) into a trial seed.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double real(double lo, double hi) { return lo + (hi - lo) * unit(); }
  bool coin() { return (rng_() & 1U) != 0; }

  Rational positive_rational() { return Rational(integer(1, 6), integer(1, 4)); }

 private:
  std::mt19937_64 rng_;
};

MoveSpace random_moves(Draw& draw, int max_moves) {
  const int k = draw.integer(2, std::max(2, max_moves));
  const int l = draw.integer(1, k - 1);
  std::vector<Rational> moves;
  auto add_unique = [&](Rational r) {
    if (std::find(moves.begin(), moves.end(), r) != moves.end()) return false;
    moves.push_back(r);
    return true;
  };
  while (static_cast<int>(moves.size()) < l) add_unique(-draw.positive_rational());
  if (draw.integer(0, 3) == 0) add_unique(Rational(0));
  while (static_cast<int>(moves.size()) < k) add_unique(draw.positive_rational());
  return MoveSpace(std::move(moves));
}

PiecewiseLinear random_piecewise(Draw& draw) {
  const int count = draw.integer(1, 4);
  std::vector<double> xs;
  while (static_cast<int>(xs.size()) < count) {
    double x = draw.integer(-12, 12) / 4.0;
    if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  PiecewiseLinear pl;
  for (double x : xs) pl.points.emplace_back(x, draw.real(-2.0, 2.0));
  pl.left_slope = draw.real(-1.5, 1.5);
  pl.right_slope = draw.real(-1.5, 1.5);
  return pl;
}

class TrialChecks {
 public:
  TrialChecks(int trial, std::uint64_t seed, double tolerance, FuzzSummary& summary, std::string context)
      : trial_(trial), seed_(seed), tolerance_(tolerance), summary_(summary), context_(std::move(context)) {}

  void equal(const std::string& check, double a, double b, double tolerance) {
    ++summary_.checks;
    if (!(std::abs(a - b) <= tolerance)) fail(check, a, b, "|a - b| > " + number(tolerance));
  }
  void equal(const std::string& check, double a, double b) { equal(check, a, b, tolerance_); }

  void less_equal(const std::string& check, double a, double b) {
    ++summary_.checks;
    if (!(a <= b + tolerance_)) fail(check, a, b, "a > b");
  }

  void truth(const std::string& check, bool ok, const std::string& detail) {
    ++summary_.checks;
    if (!ok) summary_.failures.push_back({trial_, seed_, check, context_ + ": " + detail});
  }

 private:
  static std::string number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }

  void fail(const std::string& check, double a, double b, const std::string& why) {
    summary_.failures.push_back(
        {trial_, seed_, check, context_ + ": a = " + number(a) + ", b = " + number(b) + " (" + why + ")"});
  }

  int trial_;
  std::uint64_t seed_;
  double tolerance_;
  FuzzSummary& summary_;
  std::string context_;
};

}  // namespace

VerificationReport check_superreplication(const GameSpec& game, const PayoffSpec& payoff, double alpha,
                                          const PriceResult& result, double tolerance, std::uint64_t budget) {
  const MoveSpace& moves = game.moves;
  const int k = moves.size();
  const std::uint64_t leaves = leaf_count(k, game.rounds);
  if (leaves > budget) throw BudgetError("superreplication check exceeds path budget", leaves, budget);
  if (!result.has_nodes()) throw ValidationError("price result has no recorded strategy");
  if (result.rounds != game.rounds) throw ValidationError("price result and game disagree on the number of rounds");

  VerificationReport report;
  report.tolerance = tolerance;
  report.min_slack = std::numeric_limits<double>::infinity();
  std::vector<int> path;
  std::vector<int> worst;
  const double sign = result.side == Side::Upper ? 1.0 : -1.0;

  auto visit = [&](auto&& self, const NodeKey& key, double capital) -> void {
    if (key.round == game.rounds) {
      double slack = sign * (alpha + capital - terminal_payoff(game, payoff, path));
      ++report.paths_checked;
      if (slack < report.min_slack) {
        report.min_slack = slack;
        worst = path;
      }
      return;
    }
    const NodeRecord& rec = lookup(result, key);
    for (int a = 0; a < k; ++a) {
      path.push_back(a);
      self(self, child_key(result, moves, key, a),
           capital + rec.strategy * moves.moves()[static_cast<std::size_t>(a)].to_double());
      path.pop_back();
    }
  };
  visit(visit, root_key(), 0.0);

  report.worst_path = to_moves(moves, worst);
  report.passed = report.min_slack >= -tolerance;
  return report;
}

MeasureAudit audit_measure(const GameSpec& game, const PayoffSpec& payoff, const PriceResult& result,
                           double tolerance, std::uint64_t budget) {
  if (!result.has_nodes()) throw ValidationError("price result has no recorded nodes");
  const MoveSpace& moves = game.moves;
  MeasureAudit audit;
  audit.price = result.price;
  std::vector<int> path;

  auto visit = [&](auto&& self, const NodeKey& key, double probability) -> void {
    if (key.round == game.rounds) {
      if (++audit.supported_paths > budget) {
        throw BudgetError("measure audit exceeds path budget", audit.supported_paths, budget);
      }
      audit.total_probability += probability;
      audit.expectation += probability * terminal_payoff(game, payoff, path);
      return;
    }
    const NodeRecord& rec = lookup(result, key);
    if (!rec.measure) {
      audit.issues.push_back("internal node at round " + std::to_string(key.round) + " has no conditional measure");
      audit.conditionals_exact = false;
      return;
    }
    const RiskNeutralNode& node = *rec.measure;
    const Rational& a_neg = moves.negative(node.pair.neg);
    const Rational& a_pos = moves.positive(node.pair.pos);
    ++audit.conditionals_checked;
    bool exact = node.prob_neg.sign() >= 0 && node.prob_pos.sign() >= 0 &&
                 node.prob_neg + node.prob_pos == Rational(1) && (a_neg * node.prob_neg + a_pos * node.prob_pos).is_zero();
    if (!exact) {
      audit.conditionals_exact = false;
      audit.issues.push_back("conditional at round " + std::to_string(key.round) + ", S = " + key.sum.to_string() +
                             " is not a zero-mean probability vector");
    }

    const int neg_move = moves.index_of_negative(node.pair.neg);
    const int pos_move = moves.index_of_positive(node.pair.pos);
    const NodeKey neg_key = child_key(result, moves, key, neg_move);
    const NodeKey pos_key = child_key(result, moves, key, pos_move);
    double child_mean = node.p_neg() * lookup(result, neg_key).value + node.p_pos() * lookup(result, pos_key).value;
    audit.max_martingale_error = std::max(audit.max_martingale_error, std::abs(child_mean - rec.value));
    double drift = rec.strategy * (node.p_neg() * a_neg.to_double() + node.p_pos() * a_pos.to_double());
    audit.max_capital_drift = std::max(audit.max_capital_drift, std::abs(drift));

    if (!node.prob_neg.is_zero()) {
      path.push_back(neg_move);
      self(self, neg_key, probability * node.p_neg());
      path.pop_back();
    }
    if (!node.prob_pos.is_zero()) {
      path.push_back(pos_move);
      self(self, pos_key, probability * node.p_pos());
      path.pop_back();
    }
  };
  visit(visit, root_key(), 1.0);

  if (std::abs(audit.total_probability - 1.0) > tolerance) audit.issues.push_back("path probabilities do not sum to 1");
  if (std::abs(audit.expectation - audit.price) > tolerance) audit.issues.push_back("E[f] differs from the price");
  if (audit.max_martingale_error > tolerance) audit.issues.push_back("node values are not a martingale");
  if (audit.max_capital_drift > tolerance) audit.issues.push_back("capital increments have nonzero mean");
  audit.passed = audit.issues.empty() && audit.conditionals_exact;
  return audit;
}

void fuzz_trial(std::uint64_t trial_seed, int trial, const FuzzConfig& config, FuzzSummary& summary) {
  Draw draw(trial_seed);
  const MoveSpace moves = random_moves(draw, config.max_moves);
  const int rounds = draw.integer(1, std::max(1, config.max_rounds));
  const double scale = draw.coin() ? 1.0 : 1.0 / std::sqrt(static_cast<double>(rounds));
  const PiecewiseLinear pl = random_piecewise(draw);
  const PayoffSpec payoff(pl);
  const GameSpec game(moves, rounds, scale);

  std::ostringstream context;
  context.precision(17);
  context << "moves {" << moves.to_string() << "}, N = " << rounds << ", scale = " << scale << ", payoff "
          << payoff_to_json(payoff).dump();
  TrialChecks check(trial, trial_seed, config.tolerance, summary, context.str());

  const PriceResult upper = price_european(game, payoff, Side::Upper);
  const PriceResult lower = price_european(game, payoff, Side::Lower);
  const double upper_price = upper.price + config.inject_price_error;
  const double lower_price = lower.price;

  check.less_equal("lower<=upper", lower_price, upper_price);

  check.equal("lp_upper", upper_price, lp_price(game, payoff, Side::Upper).optimum);
  check.equal("lp_lower", lower_price, lp_price(game, payoff, Side::Lower).optimum);

  const std::vector<double> values = payoff_vector(game, payoff);
  check.equal("dual_vertex_upper", upper_price, dual_vertex_enumerate(moves, rounds, values, Side::Upper));
  check.equal("dual_vertex_lower", lower_price, dual_vertex_enumerate(moves, rounds, values, Side::Lower));

  check.equal("full_tree", upper.price, price_path_dependent(game, payoff, Side::Upper).price, 1e-12);

  check.equal("reciprocity", lower_price, -price_european(game, payoff.negated(), Side::Upper).price);

  check.less_equal("binomial_max<=upper", binomial_lower_bound(game, payoff).bound, upper_price);
  check.less_equal("lower<=binomial_min", lower_price, binomial_upper_bound_on_lower(game, payoff).bound);

  // Nested spaces: add one fresh move.
  std::vector<Rational> extended = moves.moves();
  while (true) {
    Rational extra = draw.coin() ? -draw.positive_rational() : draw.positive_rational();
    if (!moves.contains(extra)) {
      extended.push_back(extra);
      break;
    }
  }
  const NestedPrices nested = nested_compare(moves, MoveSpace(extended), rounds, scale, payoff, config.tolerance);
  check.truth("nested_order", nested.ordered,
              "chain " + std::to_string(nested.outer_lower) + " <= " + std::to_string(nested.inner_lower) +
                  " <= " + std::to_string(nested.inner_upper) + " <= " + std::to_string(nested.outer_upper));

  auto [convex, concave] = split_convex_concave(pl);
  const PayoffSpec convex_payoff(convex);
  const PayoffSpec concave_payoff(concave);
  check.less_equal("convex_concave_bound", upper_price, convex_concave_bound(game, convex_payoff, concave_payoff));

  const double convex_upper = price_european(game, convex_payoff, Side::Upper).price;
  const double convex_lower = price_european(game, convex_payoff, Side::Lower).price;
  check.equal("convex_upper_outermost", convex_upper, binomial_price(game, outermost_pair(moves), convex_payoff));
  const double expected_lower = moves.positive(0).is_zero() ? evaluate_payoff(convex_payoff, 0.0)
                                                            : binomial_price(game, innermost_pair(moves), convex_payoff);
  check.equal("convex_lower_innermost", convex_lower, expected_lower);

  const VerificationReport rep = check_superreplication(game, payoff, upper.price, upper, config.tolerance);
  check.truth("superreplication", rep.passed, "min slack " + std::to_string(rep.min_slack));
}

FuzzSummary fuzz_cross_routes(const FuzzConfig& config) {
  FuzzSummary summary;
  summary.trials = std::max(0, config.trials);
  for (int trial = 0; trial < summary.trials; ++trial) {
    std::uint64_t trial_seed = mix(config.seed * 0x100000001b3ULL + static_cast<std::uint64_t>(trial));
    fuzz_trial(trial_seed, trial, config, summary);
  }
  return summary;
}

nlohmann::json to_json(const VerificationReport& report) {
  return {{"min_slack", report.min_slack},
          {"worst_path", path_json(report.worst_path)},
          {"paths_checked", report.paths_checked},
          {"tolerance", report.tolerance},
          {"passed", report.passed}};
}

nlohmann::json to_json(const MeasureAudit& audit) {
  return {{"passed", audit.passed},
          {"conditionals_exact", audit.conditionals_exact},
          {"conditionals_checked", audit.conditionals_checked},
          {"supported_paths", audit.supported_paths},
          {"total_probability", audit.total_probability},
          {"expectation", audit.expectation},
          {"price", audit.price},
          {"max_martingale_error", audit.max_martingale_error},
          {"max_capital_drift", audit.max_capital_drift},
          {"issues", audit.issues}};
}

nlohmann::json to_json(const FuzzSummary& summary) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : summary.failures) {
    failures.push_back({{"trial", f.trial}, {"trial_seed", f.trial_seed}, {"check", f.check}, {"detail", f.detail}});
  }
  return {{"trials", summary.trials},
          {"checks", summary.checks},
          {"failures", failures},
          {"passed", summary.passed()}};
}

}  // namespace superhedge
