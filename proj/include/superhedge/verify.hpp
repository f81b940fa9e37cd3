#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "superhedge/induction.hpp"
#include "superhedge/model.hpp"

namespace superhedge {

struct VerificationReport {
  /// min over paths of alpha + K_N - f (Upper) or f - alpha - K_N (Lower).
  double min_slack = 0.0;
  std::vector<Rational> worst_path;
  std::uint64_t paths_checked = 0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Runs the strategy stored in `result` from capital `alpha` along every
/// path. Throws BudgetError when k^N exceeds `budget`, ValidationError when
/// the result has no node for a visited state.
VerificationReport check_superreplication(const GameSpec& game, const PayoffSpec& payoff, double alpha,
                                          const PriceResult& result, double tolerance = 1e-9,
                                          std::uint64_t budget = kDefaultLeafBudget);

struct MeasureAudit {
  bool passed = false;
  /// Every visited conditional is a probability vector with zero mean in
  /// exact rational arithmetic.
  bool conditionals_exact = true;
  std::uint64_t conditionals_checked = 0;
  std::uint64_t supported_paths = 0;
  double total_probability = 0.0;
  double expectation = 0.0;
  double price = 0.0;
  /// max |E[value of child] - value| over supported nodes.
  double max_martingale_error = 0.0;
  /// max |M * E[x]| over supported nodes.
  double max_capital_drift = 0.0;
  std::vector<std::string> issues;
};

MeasureAudit audit_measure(const GameSpec& game, const PayoffSpec& payoff, const PriceResult& result,
                           double tolerance = 1e-10, std::uint64_t budget = kDefaultLeafBudget);

struct FuzzConfig {
  std::uint64_t seed = 0;
  int trials = 100;
  int max_moves = 3;
  int max_rounds = 3;
  double tolerance = 1e-9;
  /// Added to the induction upper price before the cross-route comparisons;
  /// nonzero only to self-test the harness.
  double inject_price_error = 0.0;
};

struct FuzzFailure {
  int trial = 0;
  std::uint64_t trial_seed = 0;
  std::string check;
  std::string detail;
};

struct FuzzSummary {
  int trials = 0;
  std::uint64_t checks = 0;
  std::vector<FuzzFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// Randomized equivalence harness: induction vs simplex LP vs dual-vertex
/// enumeration, the binomial and nested-space inequalities, reciprocity,
/// the convex/concave decomposition bound and the closed forms for convex
/// payoffs, on random rational move spaces and piecewise-linear payoffs.
FuzzSummary fuzz_cross_routes(const FuzzConfig& config);

/// One trial from its reproduction seed; appends failures to `summary`.
void fuzz_trial(std::uint64_t trial_seed, int trial, const FuzzConfig& config, FuzzSummary& summary);

nlohmann::json to_json(const VerificationReport& report);
nlohmann::json to_json(const MeasureAudit& audit);
nlohmann::json to_json(const FuzzSummary& summary);

}  // namespace superhedge
