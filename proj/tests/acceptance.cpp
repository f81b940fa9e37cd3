// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "superhedge/bounds.hpp"
#include "superhedge/induction.hpp"
#include "superhedge/pde.hpp"
#include "superhedge/verify.hpp"

using namespace superhedge;

namespace {

const MoveSpace kTri = MoveSpace::parse("-1,1,2");
const PayoffSpec kButterfly(Butterfly{-0.5, 0.5, 1.5});

// Regression value: Ē_quad(a4 = 5/2) - Ē_tri at N = 50.
constexpr double kQuadMargin = 0.019143338722667325;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double upper(const GameSpec& g, const PayoffSpec& f) { return price_european(g, f, Side::Upper, {false}).price; }
double lower(const GameSpec& g, const PayoffSpec& f) { return price_european(g, f, Side::Lower, {false}).price; }

MoveSpace quad_with(const Rational& a4) {
  std::vector<Rational> moves = kTri.moves();
  moves.push_back(a4);
  return MoveSpace(moves);
}

void table_reproduction(Outcome& o) {
  const int rounds[] = {1, 20, 40, 60, 80, 100};
  const double up[] = {0.2500, 0.3824, 0.3790, 0.3820, 0.3799, 0.3807};
  const double low[] = {0.0000, 0.1926, 0.1993, 0.2012, 0.2032, 0.2032};
  auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    GameSpec g = GameSpec::inv_sqrt_scaled(kTri, rounds[i]);
    double eu = std::abs(upper(g, kButterfly) - up[i]);
    double el = std::abs(lower(g, kButterfly) - low[i]);
    worst = std::max({worst, eu, el});
    o.require(eu <= 5e-5, "upper N=" + std::to_string(rounds[i]));
    o.require(el <= 5e-5, "lower N=" + std::to_string(rounds[i]));
  }
  double elapsed = seconds_since(start);
  o.require(elapsed < 1.0, "runtime");
  o.detail << "max |error| " << worst << ", " << elapsed << " s";
}

void pde_values(Outcome& o) {
  auto start = std::chrono::steady_clock::now();
  GridSpec grid;
  double up = value_at(solve(grid, kButterfly, Side::Upper, 1.0, 2.0), 0.0, 1.0);
  double low = value_at(solve(grid, kButterfly, Side::Lower, 1.0, 2.0), 0.0, 1.0);
  double elapsed = seconds_since(start);
  o.require(std::abs(up - 0.3817) <= 1e-3, "upper");
  o.require(std::abs(low - 0.2060) <= 1e-3, "lower");
  o.require(elapsed < 0.1, "runtime");
  o.detail << "upper " << up << ", lower " << low << ", " << elapsed << " s";
}

void convergence_gap(Outcome& o) {
  ConvergenceTable t = converge_vs_lattice(kTri, {100}, kButterfly, GridSpec{}, 5e-3);
  const ConvergenceRow& row = t.rows.front();
  o.require(row.gap_upper <= 5e-3, "upper gap");
  o.require(row.gap_lower <= 5e-3, "lower gap");
  o.detail << "gap upper " << row.gap_upper << ", lower " << row.gap_lower;
}

void cross_route(Outcome& o) {
  FuzzConfig config;
  config.seed = 0;
  config.trials = 100;
  config.max_moves = 3;
  config.max_rounds = 3;
  config.tolerance = 1e-9;
  FuzzSummary s = fuzz_cross_routes(config);
  o.require(s.passed(), std::to_string(s.failures.size()) + " failures");
  for (const auto& f : s.failures) o.detail << "\n    " << f.check << " trial " << f.trial << ": " << f.detail;
  o.detail << s.trials << " trials, " << s.checks << " checks, " << s.failures.size() << " failures";
}

PiecewiseLinear random_convex(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PiecewiseLinear pl;
  pl.left_slope = -2.0 + 2.0 * u(rng);
  double slope = pl.left_slope;
  double x = -2.0 + u(rng);
  double y = u(rng) - 0.5;
  int count = 1 + static_cast<int>(u(rng) * 4);
  for (int i = 0; i < count; ++i) {
    pl.points.emplace_back(x, y);
    slope += 0.05 + u(rng);
    double dx = 0.1 + u(rng);
    x += dx;
    y += slope * dx;
  }
  pl.right_slope = slope;
  return pl;
}

MoveSpace random_space(std::mt19937_64& rng, bool zero) {
  std::uniform_int_distribution<int> num(1, 6);
  std::uniform_int_distribution<int> den(1, 4);
  int k = std::uniform_int_distribution<int>(2, 5)(rng);
  int l = std::uniform_int_distribution<int>(1, k - 1)(rng);
  std::vector<Rational> moves;
  if (zero) moves.push_back(Rational(0));
  while (static_cast<int>(moves.size()) < k + (zero ? 1 : 0)) {
    Rational r(num(rng), den(rng));
    if (static_cast<int>(moves.size()) - (zero ? 1 : 0) < l) r = -r;
    if (std::find(moves.begin(), moves.end(), r) == moves.end()) moves.push_back(r);
  }
  return MoveSpace(moves);
}

void convex_exactness(Outcome& o) {
  std::mt19937_64 rng(2023);
  double worst = 0.0;
  int with_zero = 0;
  for (int t = 0; t < 50; ++t) {
    const bool zero = t % 5 == 4;
    with_zero += zero;
    MoveSpace m = random_space(rng, zero);
    int n = std::uniform_int_distribution<int>(1, 50)(rng);
    GameSpec g = GameSpec::inv_sqrt_scaled(m, n);
    PayoffSpec f(random_convex(rng));
    double eu = std::abs(upper(g, f) - binomial_price(g, outermost_pair(m), f));
    double expected_lower =
        m.positive(0).is_zero() ? evaluate_payoff(f, 0.0) : binomial_price(g, innermost_pair(m), f);
    double el = std::abs(lower(g, f) - expected_lower);
    worst = std::max({worst, eu, el});
    o.require(eu <= 1e-12 && el <= 1e-12, "trial " + std::to_string(t));
  }
  o.detail << "50 payoffs (" << with_zero << " with a1+ = 0), max |error| " << worst;
}

void superreplication_pinning(Outcome& o) {
  double worst_slack = 0.0;
  for (int n = 1; n <= 8; ++n) {
    GameSpec g = GameSpec::inv_sqrt_scaled(kTri, n);
    PriceResult r = price_european(g, kButterfly, Side::Upper);
    VerificationReport at = check_superreplication(g, kButterfly, r.price, r, 1e-9);
    VerificationReport below = check_superreplication(g, kButterfly, r.price - 1e-5, r, 1e-9);
    o.require(at.min_slack >= -1e-9, "slack N=" + std::to_string(n));
    o.require(at.min_slack <= 1e-9, "tight path N=" + std::to_string(n));
    o.require(!below.passed, "alpha - 1e-5 accepted N=" + std::to_string(n));
    worst_slack = std::max(worst_slack, std::abs(at.min_slack));
  }
  o.detail << "N = 1..8, max |min slack| at the price " << worst_slack;
}

void measure_audit(Outcome& o) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> y(-1.0, 1.0);
  double worst = 0.0;
  int audits = 0;
  for (int n = 1; n <= 10; ++n) {
    PayoffSpec random_pl(PiecewiseLinear{{{-1.0, y(rng)}, {0.0, y(rng)}, {1.0, y(rng)}}, y(rng), y(rng)});
    for (const PayoffSpec* f : {&kButterfly, static_cast<const PayoffSpec*>(&random_pl)}) {
      for (Side side : {Side::Upper, Side::Lower}) {
        GameSpec g = GameSpec::inv_sqrt_scaled(kTri, n);
        PriceResult r = price_european(g, *f, side);
        MeasureAudit a = audit_measure(g, *f, r, 1e-10);
        ++audits;
        worst = std::max(worst, std::abs(a.expectation - r.price));
        o.require(a.passed && a.conditionals_exact && std::abs(a.total_probability - 1.0) <= 1e-12,
                  "N=" + std::to_string(n));
      }
    }
  }
  o.detail << audits << " audits, max |E[f] - price| " << worst;
}

void inequality_suites(Outcome& o) {
  const double tol = 1e-9;
  int checks = 0;
  for (int n = 1; n <= 50; ++n) {
    GameSpec g = GameSpec::inv_sqrt_scaled(kTri, n);
    o.require(binomial_lower_bound(g, kButterfly).bound <= upper(g, kButterfly) + tol, "ineq1");
    for (const Rational& a4 : {Rational(1, 2), Rational(3, 2), Rational(5, 2)}) {
      NestedPrices np = nested_compare(kTri, quad_with(a4), n, g.payoff_scale, kButterfly, tol);
      o.require(np.ordered, "nested a4=" + a4.to_string() + " N=" + std::to_string(n));
      ++checks;
    }
  }
  GameSpec g20 = GameSpec::inv_sqrt_scaled(kTri, 20);
  auto [convex, concave] = split_convex_concave(*to_piecewise_linear(kButterfly));
  o.require(convex_concave_bound(g20, PayoffSpec(convex), PayoffSpec(concave)) >= upper(g20, kButterfly) - tol,
            "convex-concave");
  o.require(std::abs(lower(g20, kButterfly) + upper(g20, kButterfly.negated())) <= tol, "reciprocity");

  // The same four relations on the fuzz corpus.
  FuzzConfig config;
  config.seed = 0;
  config.trials = 100;
  FuzzSummary s = fuzz_cross_routes(config);
  const std::string relevant[] = {"binomial_max<=upper", "lower<=binomial_min", "nested_order",
                                  "convex_concave_bound", "reciprocity"};
  int corpus_failures = 0;
  for (const auto& f : s.failures) {
    for (const auto& name : relevant) corpus_failures += f.check == name;
  }
  o.require(corpus_failures == 0, "fuzz corpus");
  o.detail << checks << " nested chains, fuzz corpus failures " << corpus_failures;
}

void quad_middle(Outcome& o) {
  const int n = 50;
  double tri = upper(GameSpec::inv_sqrt_scaled(kTri, n), kButterfly);
  double middle = upper(GameSpec::inv_sqrt_scaled(quad_with(Rational(3, 2)), n), kButterfly);
  double outer = upper(GameSpec::inv_sqrt_scaled(quad_with(Rational(5, 2)), n), kButterfly);
  o.require(std::abs(middle - tri) <= 0.01, "a4 = 1.5 gap");
  o.require(outer - tri > 0.0, "a4 = 2.5 strictly above");
  o.require(std::abs((outer - tri) - kQuadMargin) <= 1e-9, "a4 = 2.5 regression margin");
  o.detail << "|quad(1.5) - tri| " << std::abs(middle - tri) << ", quad(2.5) - tri " << outer - tri;
}

void pruned(Outcome& o) {
  double worst_excess = -1.0;
  for (int n : {20, 50}) {
    GameSpec g = GameSpec::inv_sqrt_scaled(kTri, n);
    double exact = upper(g, kButterfly);
    for (int q : {2, 5, 10}) {
      double p = price_pruned(g, kButterfly, PruneSchedule(q), Side::Upper, {false}).price;
      worst_excess = std::max(worst_excess, p - exact);
      o.require(p <= exact + 1e-12, "q=" + std::to_string(q) + " N=" + std::to_string(n));
    }
    double full = price_pruned(g, kButterfly, PruneSchedule(n), Side::Upper, {false}).price;
    o.require(std::abs(full - binomial_lower_bound(g, kButterfly).bound) <= 1e-12, "q=N N=" + std::to_string(n));
  }
  o.detail << "max (pruned - exact) " << worst_excess;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
  };
  const Criterion criteria[] = {
      {"trinomial butterfly table", table_reproduction},
      {"PDE values", pde_values},
      {"lattice-PDE convergence gap", convergence_gap},
      {"cross-route oracle equivalence", cross_route},
      {"convex payoff exactness", convex_exactness},
      {"superreplication pinning", superreplication_pinning},
      {"extremal measure audit", measure_audit},
      {"inequality suites", inequality_suites},
      {"quadnomial middle insertion", quad_middle},
      {"pruned induction", pruned},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failures += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", ++index, c.name, o.detail.str().c_str());
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
