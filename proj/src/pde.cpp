#include "superhedge/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "superhedge/errors.hpp"
#include "superhedge/induction.hpp"

namespace superhedge {
namespace {

std::size_t whole_count(double span, double step, const char* what) {
  double n = span / step;
  double rounded = std::round(n);
  if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, rounded)) {
    std::ostringstream os;
    os << what << " span " << span << " is not a whole number of steps of " << step;
    throw ValidationError(os.str());
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

double stability_ratio(const GridSpec& grid, double sigma_max_sq) {
  return 0.5 * sigma_max_sq * grid.dt / (grid.ds * grid.ds);
}

GridSolution solve(const GridSpec& grid, const PayoffSpec& payoff, Side side, double sigma_min_sq,
                   double sigma_max_sq) {
  if (!(grid.s_min < grid.s_max)) throw ValidationError("grid needs s_min < s_max");
  if (!(grid.ds > 0.0) || !(grid.dt > 0.0) || !(grid.horizon > 0.0)) {
    throw ValidationError("grid steps and horizon must be positive");
  }
  if (!(sigma_min_sq >= 0.0) || !(sigma_max_sq >= sigma_min_sq) || !(sigma_max_sq > 0.0)) {
    throw ValidationError("need 0 <= sigma_min^2 <= sigma_max^2 and sigma_max^2 > 0");
  }
  const double ratio = stability_ratio(grid, sigma_max_sq);
  if (ratio > 0.5 + 1e-12) {
    std::ostringstream os;
    os << "unstable grid: (sigma_max^2/2) dt/ds^2 = " << ratio << " > 1/2";
    throw ValidationError(os.str());
  }

  GridSolution sol;
  sol.grid = grid;
  sol.side = side;
  sol.sigma_min_sq = sigma_min_sq;
  sol.sigma_max_sq = sigma_max_sq;
  sol.cells = whole_count(grid.s_max - grid.s_min, grid.ds, "space");
  sol.time_steps = whole_count(grid.horizon, grid.dt, "time");
  if (sigma_min_sq == 0.0) {
    sol.warnings.push_back("sigma_min^2 = 0: outside the convergence hypothesis; no convergence claim is made");
  }

  std::size_t pad = 0;
  if (grid.far_field_margin) {
    if (*grid.far_field_margin < 0.0) throw ValidationError("far-field margin must be >= 0");
    pad = *grid.far_field_margin == 0.0 ? 0 : whole_count(*grid.far_field_margin, grid.ds, "far-field margin");
  } else {
    pad = static_cast<std::size_t>(std::ceil(4.0 * std::sqrt(sigma_max_sq * grid.horizon) / grid.ds - 1e-9));
  }
  sol.margin = static_cast<double>(pad) * grid.ds;
  if (grid.far_field_margin && pad == 0) {
    sol.warnings.push_back("no far-field margin: window edges are frozen at the payoff");
  }

  const std::size_t width = sol.cells + 1 + 2 * pad;
  std::vector<double> cur(width);
  for (std::size_t i = 0; i < width; ++i) {
    double s = grid.s_min + (static_cast<double>(i) - static_cast<double>(pad)) * grid.ds;
    cur[i] = evaluate_payoff(payoff, s);
  }
  std::vector<double> next(cur);

  const double lambda = grid.dt / (2.0 * grid.ds * grid.ds);
  const double coeff_convex = (side == Side::Upper ? sigma_max_sq : sigma_min_sq) * lambda;
  const double coeff_concave = (side == Side::Upper ? sigma_min_sq : sigma_max_sq) * lambda;

  sol.field.resize((sol.time_steps + 1) * (sol.cells + 1));
  auto store = [&](std::size_t n, const std::vector<double>& row) {
    std::copy(row.begin() + static_cast<std::ptrdiff_t>(pad),
              row.begin() + static_cast<std::ptrdiff_t>(pad + sol.cells + 1),
              sol.field.begin() + static_cast<std::ptrdiff_t>(n * (sol.cells + 1)));
  };
  store(0, cur);

  for (std::size_t n = 1; n <= sol.time_steps; ++n) {
    for (std::size_t i = 1; i + 1 < width; ++i) {
      double d2 = cur[i + 1] - 2.0 * cur[i] + cur[i - 1];
      next[i] = cur[i] + (d2 >= 0.0 ? coeff_convex : coeff_concave) * d2;
    }
    for (std::size_t i = 1; i + 1 < width; ++i) {
      if (!std::isfinite(next[i])) {
        std::ostringstream os;
        os << "non-finite value at step " << n << ", s = "
           << grid.s_min + (static_cast<double>(i) - static_cast<double>(pad)) * grid.ds
           << " (stability ratio " << ratio << ")";
        throw NumericalError(os.str());
      }
    }
    std::swap(cur, next);
    store(n, cur);
  }
  return sol;
}

double value_at(const GridSolution& solution, double s, double t) {
  const GridSpec& g = solution.grid;
  const double eps = 1e-12;
  if (s < g.s_min - eps || s > g.s_max + eps || t < -eps || t > g.horizon + eps) {
    throw std::out_of_range("point outside the solution window");
  }
  double x = std::clamp((s - g.s_min) / g.ds, 0.0, static_cast<double>(solution.cells));
  double y = std::clamp(t / g.dt, 0.0, static_cast<double>(solution.time_steps));
  auto snap = [](double v) {
    double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
  };
  x = snap(x);
  y = snap(y);
  std::size_t i0 = std::min(static_cast<std::size_t>(x), solution.cells == 0 ? 0 : solution.cells - 1);
  std::size_t n0 = std::min(static_cast<std::size_t>(y), solution.time_steps == 0 ? 0 : solution.time_steps - 1);
  double fx = x - static_cast<double>(i0);
  double fy = y - static_cast<double>(n0);
  double v00 = solution.phi(n0, i0);
  double v01 = solution.phi(n0, i0 + 1);
  double v10 = solution.phi(n0 + 1, i0);
  double v11 = solution.phi(n0 + 1, i0 + 1);
  return (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
}

ConvergenceTable converge_vs_lattice(const MoveSpace& moves, const std::vector<int>& rounds_list,
                                     const PayoffSpec& payoff, const GridSpec& grid, double tolerance) {
  const Variances v = variances(moves);
  const double pde_upper = value_at(solve(grid, payoff, Side::Upper, v.sigma_min_sq, v.sigma_max_sq), 0.0, grid.horizon);
  const double pde_lower = value_at(solve(grid, payoff, Side::Lower, v.sigma_min_sq, v.sigma_max_sq), 0.0, grid.horizon);

  PricingOptions quiet;
  quiet.record_nodes = false;
  ConvergenceTable table;
  table.tolerance = tolerance;
  for (int n : rounds_list) {
    GameSpec game = GameSpec::inv_sqrt_scaled(moves, n);
    ConvergenceRow row;
    row.rounds = n;
    row.lattice_upper = price_european(game, payoff, Side::Upper, quiet).price;
    row.lattice_lower = price_european(game, payoff, Side::Lower, quiet).price;
    row.pde_upper = pde_upper;
    row.pde_lower = pde_lower;
    row.gap_upper = std::abs(row.lattice_upper - pde_upper);
    row.gap_lower = std::abs(row.lattice_lower - pde_lower);
    table.rows.push_back(row);
  }
  if (!table.rows.empty()) {
    auto last = std::max_element(table.rows.begin(), table.rows.end(),
                                 [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.rounds < b.rounds; });
    table.converged = last->gap_upper <= tolerance && last->gap_lower <= tolerance;
  }
  return table;
}

nlohmann::json summary_json(const GridSolution& solution) {
  const GridSpec& g = solution.grid;
  nlohmann::json j;
  j["value_at_origin"] = value_at(solution, std::clamp(0.0, g.s_min, g.s_max), g.horizon);
  j["side"] = to_string(solution.side);
  j["grid"] = {{"s_min", g.s_min},
               {"s_max", g.s_max},
               {"ds", g.ds},
               {"dt", g.dt},
               {"horizon", g.horizon},
               {"far_field_margin", solution.margin},
               {"cells", solution.cells},
               {"time_steps", solution.time_steps}};
  j["sigma_min_sq"] = solution.sigma_min_sq;
  j["sigma_max_sq"] = solution.sigma_max_sq;
  j["stability_ratio"] = stability_ratio(g, solution.sigma_max_sq);
  if (!solution.warnings.empty()) j["warnings"] = solution.warnings;
  return j;
}

}  // namespace superhedge
