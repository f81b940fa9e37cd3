#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "superhedge/model.hpp"

namespace superhedge {

/// Uniform space-time grid. [s_min, s_max] is the window that is stored and
/// reported. The explicit scheme runs on the window extended by
/// `far_field_margin` on both sides, with the payoff frozen at the extended
/// ends; nullopt selects ceil(4 * sigma_max * sqrt(horizon) / ds) * ds.
struct GridSpec {
  double s_min = -2.0;
  double s_max = 2.0;
  double ds = 0.1;
  double dt = 1.0 / 300.0;
  double horizon = 1.0;
  std::optional<double> far_field_margin;
};

/// (sigma_max^2 / 2) * dt / ds^2; the explicit scheme is stable for <= 1/2.
double stability_ratio(const GridSpec& grid, double sigma_max_sq);

/// Time-to-maturity field phi[n][i] on the window, n = 0 being the payoff.
class GridSolution {
 public:
  GridSpec grid;
  Side side = Side::Upper;
  double sigma_min_sq = 0.0;
  double sigma_max_sq = 0.0;
  double margin = 0.0;
  std::size_t time_steps = 0;
  std::size_t cells = 0;
  std::vector<double> field;
  std::vector<std::string> warnings;

  double phi(std::size_t n, std::size_t i) const { return field[n * (cells + 1) + i]; }
  double s_at(std::size_t i) const { return grid.s_min + static_cast<double>(i) * grid.ds; }
  double t_at(std::size_t n) const { return static_cast<double>(n) * grid.dt; }
};

/// Explicit scheme for phi_t = (sigma~^2 / 2) phi_ss where sigma~^2 is the
/// maximal variance wherever the discrete second difference is >= 0 and the
/// minimal one elsewhere (Upper); Lower swaps the selection. Throws
/// ValidationError on an unstable or malformed grid, NumericalError on NaN.
GridSolution solve(const GridSpec& grid, const PayoffSpec& payoff, Side side, double sigma_min_sq,
                   double sigma_max_sq);

/// Bilinear interpolation; throws std::out_of_range outside the window.
double value_at(const GridSolution& solution, double s, double t);

struct ConvergenceRow {
  int rounds = 0;
  double lattice_upper = 0.0;
  double lattice_lower = 0.0;
  double pde_upper = 0.0;
  double pde_lower = 0.0;
  double gap_upper = 0.0;
  double gap_lower = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double tolerance = 0.0;
  /// Both gaps at the largest N are within tolerance.
  bool converged = false;
};

/// Lattice prices of the 1/sqrt(N)-scaled games against phi(0, horizon) from
/// the scheme with the move space's extreme variances.
ConvergenceTable converge_vs_lattice(const MoveSpace& moves, const std::vector<int>& rounds_list,
                                     const PayoffSpec& payoff, const GridSpec& grid, double tolerance);

nlohmann::json summary_json(const GridSolution& solution);

}  // namespace superhedge
