#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "superhedge/bounds.hpp"
#include "superhedge/errors.hpp"
#include "superhedge/induction.hpp"
#include "superhedge/lp.hpp"
#include "superhedge/model.hpp"
#include "superhedge/pde.hpp"
#include "superhedge/verify.hpp"

namespace superhedge::cli {
namespace {

using nlohmann::json;

struct Globals {
  std::string output;
  std::string format;
  std::uint64_t seed = 0;
  std::uint64_t budget_leaves = kDefaultLeafBudget;
  double tolerance = 1e-9;
};

/// Options shared by the game-based subcommands.
struct GameOptions {
  std::string moves = "-1,1,2";
  int rounds = 1;
  std::string scale = "none";
  std::string payoff = "butterfly(-0.5,0.5,1.5)";
  std::string side = "upper";

  GameSpec game() const { return make_game(MoveSpace::parse(moves), rounds); }
  GameSpec make_game(MoveSpace space, int n) const {
    if (n < 1) throw ValidationError("--rounds must be >= 1");
    if (scale == "inv_sqrt_n") return GameSpec::inv_sqrt_scaled(std::move(space), n);
    if (scale == "none") return GameSpec(std::move(space), n, 1.0);
    throw ValidationError("--scale must be none or inv_sqrt_n");
  }
};

/// Rational syntax ("1/300", "0.1") or any decimal literal.
double parse_number(const std::string& text) {
  try {
    return Rational::parse(text).to_double();
  } catch (const ValidationError&) {
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ValidationError("invalid number '" + text + "'");
  return v;
}

struct GridOptions {
  std::string s_range = "-2,2";
  std::string ds = "1/10";
  std::string dt = "1/300";
  std::string horizon = "1";
  std::string far_field = "auto";

  GridSpec spec() const {
    GridSpec g;
    auto comma = s_range.find(',');
    if (comma == std::string::npos) throw ValidationError("--s-range expects lo,hi");
    g.s_min = parse_number(s_range.substr(0, comma));
    g.s_max = parse_number(s_range.substr(comma + 1));
    g.ds = parse_number(ds);
    g.dt = parse_number(dt);
    g.horizon = parse_number(horizon);
    if (far_field != "auto") g.far_field_margin = parse_number(far_field);
    return g;
  }
};

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      int v = std::stoi(part, &used);
      if (used != part.size() || v < 1) throw std::invalid_argument(part);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError("expected a list of positive integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw ValidationError("empty list of rounds");
  return out;
}

Side side_of(const std::string& text) { return parse_side(text); }

bool want_csv(const Globals& g, bool csv_default) {
  if (g.format.empty()) return csv_default;
  if (g.format == "csv") return true;
  if (g.format == "json") return false;
  throw ValidationError("--format must be json or csv");
}

/// Picks the stream for primary output; opens --output if given.
class Sink {
 public:
  Sink(const Globals& g, std::ostream& fallback) : stream_(&fallback) {
    if (!g.output.empty()) {
      file_.open(g.output, std::ios::binary);
      if (!file_) throw ValidationError("cannot open output file '" + g.output + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void add_game_options(CLI::App* cmd, GameOptions& o, bool with_side) {
  cmd->add_option("--moves", o.moves, "Move space as comma-separated rationals")->capture_default_str();
  cmd->add_option("--rounds,-N", o.rounds, "Number of rounds")->capture_default_str();
  cmd->add_option("--scale", o.scale, "Payoff argument scaling: none or inv_sqrt_n")->capture_default_str();
  cmd->add_option("--payoff", o.payoff, "Inline payoff, JSON, or JSON file path")->capture_default_str();
  if (with_side) cmd->add_option("--side", o.side, "upper or lower")->capture_default_str();
}

void add_grid_options(CLI::App* cmd, GridOptions& o) {
  cmd->add_option("--s-range", o.s_range, "Reported window lo,hi")->capture_default_str();
  cmd->add_option("--ds", o.ds, "Space step (rational or decimal)")->capture_default_str();
  cmd->add_option("--dt", o.dt, "Time step (rational or decimal)")->capture_default_str();
  cmd->add_option("--horizon", o.horizon, "Time to maturity")->capture_default_str();
  cmd->add_option("--far-field", o.far_field, "Margin beyond the window, or auto")->capture_default_str();
}

// price ----------------------------------------------------------------------

struct PriceArgs {
  GameOptions game;
  bool dump_nodes = false;
  bool verify = false;
  bool full_tree = false;
  int prune_period = 0;
};

int cmd_price(const Globals& g, const PriceArgs& a, std::ostream& out, std::ostream& err) {
  const GameSpec game = a.game.game();
  const PayoffSpec payoff = parse_payoff(a.game.payoff);
  const Side side = side_of(a.game.side);
  PricingOptions options;
  options.budget_leaves = g.budget_leaves;
  options.record_nodes = a.dump_nodes || a.verify;

  auto start = std::chrono::steady_clock::now();
  PriceResult result;
  if (a.prune_period > 0) {
    result = price_pruned(game, payoff, PruneSchedule(a.prune_period), side, options);
  } else if (a.full_tree || !payoff.is_european()) {
    result = price_path_dependent(game, payoff, side, options);
  } else {
    result = price_european(game, payoff, side, options);
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json doc;
  bool verified = true;
  if (a.verify) {
    VerificationReport rep = check_superreplication(game, payoff, result.price, result, g.tolerance, g.budget_leaves);
    MeasureAudit audit = audit_measure(game, payoff, result, std::max(g.tolerance, 1e-10), g.budget_leaves);
    doc["verification"] = to_json(rep);
    doc["measure_audit"] = to_json(audit);
    verified = rep.passed && audit.passed;
    if (!verified) err << "verification failed for the computed price\n";
  }

  Sink sink(g, out);
  if (want_csv(g, false)) {
    *sink << "price,side,N,moves,elapsed\n"
          << num(result.price) << ',' << to_string(side) << ',' << game.rounds << ",\"" << game.moves.to_string()
          << "\"," << num(elapsed) << '\n';
  } else {
    json base = to_json(result, game.moves, a.dump_nodes);
    base["N"] = game.rounds;
    base["moves"] = game.moves.to_string();
    base["scale"] = a.game.scale;
    base["payoff"] = payoff_to_json(payoff);
    base["elapsed"] = elapsed;
    if (doc.is_object()) base.update(doc);
    *sink << base.dump(2) << '\n';
  }
  return verified ? kOk : kVerification;
}

// pde ------------------------------------------------------------------------

struct PdeArgs {
  GridOptions grid;
  std::string payoff = "butterfly(-0.5,0.5,1.5)";
  std::string moves = "-1,1,2";
  std::optional<double> sigma_min_sq;
  std::optional<double> sigma_max_sq;
  std::string side = "both";
  std::string field_path;
};

void write_field(const GridSolution& sol, std::ostream& os) {
  os << "t,s,phi\n";
  for (std::size_t n = 0; n <= sol.time_steps; ++n) {
    for (std::size_t i = 0; i <= sol.cells; ++i) {
      os << num(sol.t_at(n)) << ',' << num(sol.s_at(i)) << ',' << num(sol.phi(n, i)) << '\n';
    }
  }
}

int cmd_pde(const Globals& g, const PdeArgs& a, std::ostream& out, std::ostream& err) {
  const GridSpec grid = a.grid.spec();
  const PayoffSpec payoff = parse_payoff(a.payoff);
  Variances v;
  if (a.sigma_min_sq || a.sigma_max_sq) {
    if (!a.sigma_min_sq || !a.sigma_max_sq) throw ValidationError("give both --sigma-min-sq and --sigma-max-sq");
    v = {*a.sigma_min_sq, *a.sigma_max_sq};
  } else {
    v = variances(MoveSpace::parse(a.moves));
  }
  std::vector<Side> sides;
  if (a.side == "both") {
    sides = {Side::Upper, Side::Lower};
  } else {
    sides = {side_of(a.side)};
  }
  if (!a.field_path.empty() && sides.size() != 1) throw ValidationError("--field needs a single --side");

  std::vector<GridSolution> sols;
  for (Side s : sides) sols.push_back(solve(grid, payoff, s, v.sigma_min_sq, v.sigma_max_sq));
  for (const auto& w : sols.front().warnings) err << "warning: " << w << '\n';

  if (!a.field_path.empty()) {
    std::ofstream f(a.field_path, std::ios::binary);
    if (!f) throw ValidationError("cannot open field file '" + a.field_path + "'");
    write_field(sols.front(), f);
  }

  Sink sink(g, out);
  if (want_csv(g, false)) {
    *sink << "side,value\n";
    for (const auto& s : sols) *sink << to_string(s.side) << ',' << num(value_at(s, 0.0, grid.horizon)) << '\n';
  } else {
    json doc;
    for (const auto& s : sols) doc[to_string(s.side)] = summary_json(s);
    *sink << doc.dump(2) << '\n';
  }
  return kOk;
}

// converge -------------------------------------------------------------------

struct ConvergeArgs {
  GameOptions game;
  std::string rounds = "1,20,40,60,80,100";
  bool pde = false;
  GridOptions grid;
};

int cmd_converge(const Globals& g, const ConvergeArgs& a, std::ostream& out) {
  const MoveSpace moves = MoveSpace::parse(a.game.moves);
  const PayoffSpec payoff = parse_payoff(a.game.payoff);
  const std::vector<int> rounds = parse_int_list(a.rounds);
  PricingOptions quiet;
  quiet.record_nodes = false;

  std::optional<double> pde_upper;
  std::optional<double> pde_lower;
  if (a.pde) {
    const GridSpec grid = a.grid.spec();
    const Variances v = variances(moves);
    pde_upper = value_at(solve(grid, payoff, Side::Upper, v.sigma_min_sq, v.sigma_max_sq), 0.0, grid.horizon);
    pde_lower = value_at(solve(grid, payoff, Side::Lower, v.sigma_min_sq, v.sigma_max_sq), 0.0, grid.horizon);
  }

  json rows = json::array();
  std::ostringstream csv;
  csv << "N,upper,lower,binomial_max,binomial_min,pde_upper,pde_lower\n";
  for (int n : rounds) {
    const GameSpec game = a.game.make_game(moves, n);
    double upper = price_european(game, payoff, Side::Upper, quiet).price;
    double lower = price_european(game, payoff, Side::Lower, quiet).price;
    double bmax = binomial_lower_bound(game, payoff).bound;
    double bmin = binomial_upper_bound_on_lower(game, payoff).bound;
    csv << n << ',' << num(upper) << ',' << num(lower) << ',' << num(bmax) << ',' << num(bmin) << ','
        << (pde_upper ? num(*pde_upper) : "") << ',' << (pde_lower ? num(*pde_lower) : "") << '\n';
    json row = {{"N", n}, {"upper", upper}, {"lower", lower}, {"binomial_max", bmax}, {"binomial_min", bmin}};
    row["pde_upper"] = pde_upper ? json(*pde_upper) : json(nullptr);
    row["pde_lower"] = pde_lower ? json(*pde_lower) : json(nullptr);
    rows.push_back(row);
  }

  Sink sink(g, out);
  if (want_csv(g, true)) {
    *sink << csv.str();
  } else {
    *sink << rows.dump(2) << '\n';
  }
  return kOk;
}

// sweep-quad -----------------------------------------------------------------

struct SweepArgs {
  std::string moves = "-1,1,2";
  std::string a4_range = "1/10,5,1/10";
  int max_rounds = 50;
  std::string scale = "inv_sqrt_n";
  std::string payoff = "butterfly(-0.5,0.5,1.5)";
};

std::vector<Rational> parse_range(const std::string& text) {
  std::vector<Rational> out;
  if (text.find_first_not_of(" ") == std::string::npos) return out;
  std::vector<Rational> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) parts.push_back(Rational::parse(part));
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw ValidationError("--a4-range expects start,stop,step or a single value");
  if (parts[2].sign() <= 0) throw ValidationError("--a4-range step must be positive");
  for (Rational x = parts[0]; x <= parts[1]; x += parts[2]) out.push_back(x);
  return out;
}

int cmd_sweep_quad(const Globals& g, const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const MoveSpace base = MoveSpace::parse(a.moves);
  const PayoffSpec payoff = parse_payoff(a.payoff);
  if (a.max_rounds < 1) throw ValidationError("--max-rounds must be >= 1");
  GameOptions scaling;
  scaling.scale = a.scale;
  PricingOptions quiet;
  quiet.record_nodes = false;

  Sink sink(g, out);
  *sink << "a4,N,upper\n";
  for (int n = 1; n <= a.max_rounds; ++n) {
    *sink << "none," << n << ',' << num(price_european(scaling.make_game(base, n), payoff, Side::Upper, quiet).price)
          << '\n';
  }
  for (const Rational& a4 : parse_range(a.a4_range)) {
    if (base.contains(a4)) {
      err << "notice: a4 = " << a4 << " is already a move; skipped\n";
      continue;
    }
    std::vector<Rational> ext = base.moves();
    ext.push_back(a4);
    const MoveSpace quad(ext);
    for (int n = 1; n <= a.max_rounds; ++n) {
      *sink << a4.to_string() << ',' << n << ','
            << num(price_european(scaling.make_game(quad, n), payoff, Side::Upper, quiet).price) << '\n';
    }
  }
  return kOk;
}

// bounds ---------------------------------------------------------------------

struct BoundsArgs {
  GameOptions game;
  std::string compare_nested;
};

int cmd_bounds(const Globals& g, const BoundsArgs& a, std::ostream& out, std::ostream& err) {
  const GameSpec game = a.game.game();
  const PayoffSpec payoff = parse_payoff(a.game.payoff);
  const double tol = g.tolerance;
  PricingOptions quiet;
  quiet.record_nodes = false;

  const double upper = price_european(game, payoff, Side::Upper, quiet).price;
  const double lower = price_european(game, payoff, Side::Lower, quiet).price;
  const BinomialBound bmax = binomial_lower_bound(game, payoff);
  const BinomialBound bmin = binomial_upper_bound_on_lower(game, payoff);
  json doc = {{"N", game.rounds},
              {"moves", game.moves.to_string()},
              {"upper", upper},
              {"lower", lower},
              {"binomial_max", {{"bound", bmax.bound}, {"pair", {bmax.pair.neg, bmax.pair.pos}}}},
              {"binomial_min", {{"bound", bmin.bound}, {"pair", {bmin.pair.neg, bmin.pair.pos}}}}};
  bool ok = bmax.bound <= upper + tol && lower <= bmin.bound + tol;

  if (auto pl = to_piecewise_linear(payoff)) {
    auto [convex, concave] = split_convex_concave(*pl);
    double cc = convex_concave_bound(game, PayoffSpec(convex), PayoffSpec(concave));
    doc["convex_concave_bound"] = cc;
    ok = ok && upper <= cc + tol;
  }
  if (!a.compare_nested.empty()) {
    const MoveSpace outer = MoveSpace::parse(a.compare_nested);
    NestedPrices np = nested_compare(game.moves, outer, game.rounds, game.payoff_scale, payoff, tol);
    doc["nested"] = {{"outer_moves", outer.to_string()},
                     {"chain", {np.outer_lower, np.inner_lower, np.inner_upper, np.outer_upper}},
                     {"ordered", np.ordered}};
    ok = ok && np.ordered;
  }
  doc["passed"] = ok;
  if (!ok) err << "a bound inequality failed\n";

  Sink sink(g, out);
  *sink << doc.dump(2) << '\n';
  return ok ? kOk : kVerification;
}

// lp -------------------------------------------------------------------------

struct LpArgs {
  GameOptions game;
  std::string dump_path;
  bool dual_vertex = false;
  std::uint64_t row_budget = kDefaultLpRowBudget;
};

int cmd_lp(const Globals& g, const LpArgs& a, std::ostream& out, std::ostream& err) {
  const GameSpec game = a.game.game();
  const PayoffSpec payoff = parse_payoff(a.game.payoff);
  const Side side = side_of(a.game.side);
  if (!a.dump_path.empty()) {
    std::ofstream f(a.dump_path, std::ios::binary);
    if (!f) throw ValidationError("cannot open dump file '" + a.dump_path + "'");
    LpProblem problem = build_matrix(game.moves, game.rounds, a.row_budget);
    problem.rhs = payoff_vector(game, side == Side::Upper ? payoff : payoff.negated(), a.row_budget);
    dump_problem(problem, f);
  }
  const LpSolution sol = lp_price(game, payoff, side, a.row_budget);
  PricingOptions quiet;
  quiet.record_nodes = false;
  const double induction = price_european(game, payoff, side, quiet).price;
  json doc = {{"side", to_string(side)},
              {"N", game.rounds},
              {"moves", game.moves.to_string()},
              {"lp_price", sol.optimum},
              {"induction_price", induction},
              {"difference", sol.optimum - induction},
              {"iterations", sol.iterations}};
  bool ok = std::abs(sol.optimum - induction) <= g.tolerance;
  if (a.dual_vertex) {
    double dv = dual_vertex_enumerate(game.moves, game.rounds, payoff_vector(game, payoff, a.row_budget), side);
    doc["dual_vertex_price"] = dv;
    ok = ok && std::abs(dv - induction) <= g.tolerance;
  }
  doc["passed"] = ok;
  if (!ok) err << "LP and induction prices disagree\n";
  Sink sink(g, out);
  *sink << doc.dump(2) << '\n';
  return ok ? kOk : kVerification;
}

// verify ---------------------------------------------------------------------

struct VerifyArgs {
  GameOptions game;
  std::optional<double> alpha;
  double alpha_offset = 0.0;
};

int cmd_verify(const Globals& g, const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const GameSpec game = a.game.game();
  const PayoffSpec payoff = parse_payoff(a.game.payoff);
  const Side side = side_of(a.game.side);
  PricingOptions options;
  options.budget_leaves = g.budget_leaves;
  const PriceResult result = payoff.is_european() ? price_european(game, payoff, side, options)
                                                  : price_path_dependent(game, payoff, side, options);
  const double alpha = a.alpha.value_or(result.price) + a.alpha_offset;
  const VerificationReport rep = check_superreplication(game, payoff, alpha, result, g.tolerance, g.budget_leaves);
  const MeasureAudit audit = audit_measure(game, payoff, result, std::max(g.tolerance, 1e-10), g.budget_leaves);
  json doc = {{"price", result.price},
              {"alpha", alpha},
              {"side", to_string(side)},
              {"superreplication", to_json(rep)},
              {"measure_audit", to_json(audit)}};
  const bool ok = rep.passed && audit.passed;
  doc["passed"] = ok;
  if (!ok) err << "verification failed\n";
  Sink sink(g, out);
  *sink << doc.dump(2) << '\n';
  return ok ? kOk : kVerification;
}

// fuzz -----------------------------------------------------------------------

struct FuzzArgs {
  int trials = 100;
  int max_moves = 3;
  int max_rounds = 3;
  double inject_error = 0.0;
};

int cmd_fuzz(const Globals& g, const FuzzArgs& a, std::ostream& out, std::ostream& err) {
  if (a.trials < 0) throw ValidationError("--trials must be >= 0");
  if (a.max_moves < 2 || a.max_moves > 3) throw ValidationError("--max-moves must be 2 or 3");
  if (a.max_rounds < 1 || a.max_rounds > 3) throw ValidationError("--max-rounds must be in 1..3");
  FuzzConfig config;
  config.seed = g.seed;
  config.trials = a.trials;
  config.max_moves = a.max_moves;
  config.max_rounds = a.max_rounds;
  config.tolerance = g.tolerance;
  config.inject_price_error = a.inject_error;
  const FuzzSummary summary = fuzz_cross_routes(config);
  for (const auto& f : summary.failures) {
    err << "trial " << f.trial << " (seed " << f.trial_seed << ") " << f.check << ": " << f.detail << '\n';
  }
  Sink sink(g, out);
  *sink << to_json(summary).dump(2) << '\n';
  return summary.passed() ? kOk : kVerification;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Superhedging prices in multinomial games"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--output,-o", g.output, "Write primary output to this file");
  app.add_option("--format", g.format, "json or csv");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--budget-leaves", g.budget_leaves, "Path enumeration budget")->capture_default_str();
  app.add_option("--tolerance", g.tolerance, "Tolerance for checks")->capture_default_str();

  std::function<int()> action;

  PriceArgs price;
  auto* c_price = app.add_subcommand("price", "Upper or lower hedging price by backward induction");
  add_game_options(c_price, price.game, true);
  c_price->add_flag("--dump-nodes", price.dump_nodes, "Include the node table");
  c_price->add_flag("--verify", price.verify, "Check superreplication and the extremal measure");
  c_price->add_flag("--full-tree", price.full_tree, "Price on the full game tree");
  c_price->add_option("--prune-period", price.prune_period, "Re-maximize only every q rounds");
  c_price->callback([&] { action = [&] { return cmd_price(g, price, out, err); }; });

  PdeArgs pde;
  auto* c_pde = app.add_subcommand("pde", "Explicit finite-difference solution of the limiting equation");
  add_grid_options(c_pde, pde.grid);
  c_pde->add_option("--payoff", pde.payoff, "Payoff")->capture_default_str();
  c_pde->add_option("--moves", pde.moves, "Move space giving the variances")->capture_default_str();
  c_pde->add_option("--sigma-min-sq", pde.sigma_min_sq, "Minimal variance");
  c_pde->add_option("--sigma-max-sq", pde.sigma_max_sq, "Maximal variance");
  c_pde->add_option("--side", pde.side, "upper, lower or both")->capture_default_str();
  c_pde->add_option("--field", pde.field_path, "Write the field as CSV t,s,phi");
  c_pde->callback([&] { action = [&] { return cmd_pde(g, pde, out, err); }; });

  ConvergeArgs conv;
  conv.game.scale = "inv_sqrt_n";
  auto* c_conv = app.add_subcommand("converge", "Lattice prices over N with binomial bounds and PDE values");
  add_game_options(c_conv, conv.game, false);
  c_conv->remove_option(c_conv->get_option("--rounds"));
  c_conv->add_option("--rounds,-N", conv.rounds, "Comma-separated N list")->capture_default_str();
  c_conv->add_flag("--pde", conv.pde, "Fill the PDE columns");
  add_grid_options(c_conv, conv.grid);
  c_conv->callback([&] { action = [&] { return cmd_converge(g, conv, out); }; });

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep-quad", "Upper prices with a fourth move a4 over a range");
  c_sweep->add_option("--moves", sweep.moves, "Base move space")->capture_default_str();
  c_sweep->add_option("--a4-range", sweep.a4_range, "start,stop,step (rationals), a single value, or empty")
      ->capture_default_str();
  c_sweep->add_option("--max-rounds", sweep.max_rounds, "N runs over 1..max")->capture_default_str();
  c_sweep->add_option("--scale", sweep.scale, "none or inv_sqrt_n")->capture_default_str();
  c_sweep->add_option("--payoff", sweep.payoff, "Payoff")->capture_default_str();
  c_sweep->callback([&] { action = [&] { return cmd_sweep_quad(g, sweep, out, err); }; });

  BoundsArgs bounds;
  auto* c_bounds = app.add_subcommand("bounds", "Binomial, convex/concave and nested-space bounds");
  add_game_options(c_bounds, bounds.game, false);
  c_bounds->add_option("--compare-nested", bounds.compare_nested, "Outer move space containing --moves");
  c_bounds->callback([&] { action = [&] { return cmd_bounds(g, bounds, out, err); }; });

  LpArgs lp;
  auto* c_lp = app.add_subcommand("lp", "Price through the superreplication linear program");
  add_game_options(c_lp, lp.game, true);
  c_lp->add_option("--dump", lp.dump_path, "Write the LP in plain text");
  c_lp->add_flag("--dual-vertex", lp.dual_vertex, "Also enumerate the dual vertices");
  c_lp->add_option("--row-budget", lp.row_budget, "Maximum number of LP rows")->capture_default_str();
  c_lp->callback([&] { action = [&] { return cmd_lp(g, lp, out, err); }; });

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "Check the extracted strategy and measure on every path");
  add_game_options(c_verify, verify.game, true);
  c_verify->add_option("--alpha", verify.alpha, "Initial capital (default: the price)");
  c_verify->add_option("--alpha-offset", verify.alpha_offset, "Added to the initial capital");
  c_verify->callback([&] { action = [&] { return cmd_verify(g, verify, out, err); }; });

  FuzzArgs fuzz;
  auto* c_fuzz = app.add_subcommand("fuzz", "Randomized cross-route equivalence checks");
  c_fuzz->add_option("--trials", fuzz.trials, "Number of trials")->capture_default_str();
  c_fuzz->add_option("--max-moves", fuzz.max_moves, "Largest move space (2 or 3)")->capture_default_str();
  c_fuzz->add_option("--max-rounds", fuzz.max_rounds, "Largest N (1..3)")->capture_default_str();
  c_fuzz->add_option("--inject-error", fuzz.inject_error, "Corrupt the upper price (harness self-test)");
  c_fuzz->callback([&] { action = [&] { return cmd_fuzz(g, fuzz, out, err); }; });

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      auto parsed = app.get_subcommands();
      out << (parsed.empty() ? app.help() : parsed.front()->help());
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  try {
    return action ? action() : kValidation;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const BudgetError& e) {
    err << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace superhedge::cli
