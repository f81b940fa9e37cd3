#include <cmath>
#include <stdexcept>

#include "doctest.h"

#include "superhedge/errors.hpp"
#include "superhedge/pde.hpp"

using namespace superhedge;

namespace {

const PayoffSpec kButterfly(Butterfly{-0.5, 0.5, 1.5});

}  // namespace

TEST_CASE("published PDE values at the origin") {
  GridSpec grid;
  CHECK(stability_ratio(grid, 2.0) == doctest::Approx(1.0 / 3.0));
  double up = value_at(solve(grid, kButterfly, Side::Upper, 1.0, 2.0), 0.0, 1.0);
  double low = value_at(solve(grid, kButterfly, Side::Lower, 1.0, 2.0), 0.0, 1.0);
  CHECK(std::abs(up - 0.3817) <= 1e-3);
  CHECK(std::abs(low - 0.2060) <= 1e-3);
  CHECK(std::abs(up - 0.3817) <= 5e-4);
}

TEST_CASE("far-field margin") {
  GridSpec grid;
  GridSolution auto_margin = solve(grid, kButterfly, Side::Upper, 1.0, 2.0);
  // ceil(4 * sqrt(2) / 0.1) cells.
  CHECK(auto_margin.margin == doctest::Approx(5.7));
  CHECK(auto_margin.cells == 40);

  // Frozen at exactly [-2, 2]: the value an independent explicit-scheme
  // implementation gives with no margin.
  grid.far_field_margin = 0.0;
  GridSolution tight = solve(grid, kButterfly, Side::Upper, 1.0, 2.0);
  CHECK(value_at(tight, 0.0, 1.0) == doctest::Approx(0.37456).epsilon(1e-4));
  CHECK_FALSE(tight.warnings.empty());

  grid.far_field_margin = 1.0;
  CHECK(solve(grid, kButterfly, Side::Upper, 1.0, 2.0).margin == doctest::Approx(1.0));
  grid.far_field_margin = 0.05;
  CHECK_THROWS_AS(solve(grid, kButterfly, Side::Upper, 1.0, 2.0), ValidationError);
}

TEST_CASE("stability and grid validation") {
  GridSpec grid;
  grid.dt = 0.01;
  CHECK(stability_ratio(grid, 2.0) == doctest::Approx(1.0));
  CHECK_THROWS_WITH_AS(solve(grid, kButterfly, Side::Upper, 1.0, 2.0), doctest::Contains("= 1"), ValidationError);

  GridSpec bad;
  bad.s_min = 1.0;
  bad.s_max = 0.0;
  CHECK_THROWS_AS(solve(bad, kButterfly, Side::Upper, 1.0, 2.0), ValidationError);
  GridSpec ragged;
  ragged.ds = 0.3;
  CHECK_THROWS_AS(solve(ragged, kButterfly, Side::Upper, 1.0, 2.0), ValidationError);
  CHECK_THROWS_AS(solve(GridSpec{}, kButterfly, Side::Upper, 2.0, 1.0), ValidationError);
  CHECK_THROWS_AS(solve(GridSpec{}, kButterfly, Side::Upper, -1.0, 1.0), ValidationError);
}

TEST_CASE("zero minimal variance is allowed with a warning") {
  GridSolution s = solve(GridSpec{}, kButterfly, Side::Upper, 0.0, 1.0);
  CHECK_FALSE(s.warnings.empty());
  // The upper value is nondecreasing in t.
  for (std::size_t n = 1; n <= s.time_steps; ++n) CHECK(s.phi(n, 20) >= s.phi(n - 1, 20) - 1e-15);
}

TEST_CASE("constant and linear payoffs are preserved") {
  GridSolution c = solve(GridSpec{}, parse_payoff("constant(0.7)"), Side::Upper, 1.0, 2.0);
  for (double v : c.field) CHECK(v == 0.7);

  PayoffSpec linear(PiecewiseLinear{{{0.0, 0.0}}, 1.0, 1.0});
  GridSolution l = solve(GridSpec{}, linear, Side::Lower, 1.5, 1.5);
  for (std::size_t n = 0; n <= l.time_steps; n += 50) {
    for (std::size_t i = 0; i <= l.cells; ++i) CHECK(l.phi(n, i) == doctest::Approx(l.s_at(i)).epsilon(1e-12));
  }
}

TEST_CASE("heat equation limit") {
  // s^2 sampled on the grid; the scheme adds sigma^2 t exactly away from the ends.
  GridSpec grid{-2.0, 2.0, 0.1, 1.0 / 300.0, 1.0, std::optional<double>(6.0)};
  PiecewiseLinear sq;
  for (int i = -80; i <= 80; ++i) {
    double s = i * 0.1;
    sq.points.emplace_back(s, s * s);
  }
  sq.left_slope = -16.0;
  sq.right_slope = 16.0;
  GridSolution sol = solve(grid, PayoffSpec(sq), Side::Upper, 1.5, 1.5);
  for (double t : {0.25, 0.5, 1.0}) {
    double v = value_at(sol, 0.0, t);
    CHECK(std::abs(v - 1.5 * t) <= 0.01 * 1.5 * t);
  }
}

TEST_CASE("comparison principle and side ordering") {
  GridSpec grid;
  PayoffSpec bigger(Butterfly{-0.6, 0.5, 1.6});
  GridSolution a = solve(grid, kButterfly, Side::Upper, 1.0, 2.0);
  GridSolution b = solve(grid, bigger, Side::Upper, 1.0, 2.0);
  GridSolution lo = solve(grid, kButterfly, Side::Lower, 1.0, 2.0);
  for (std::size_t k = 0; k < a.field.size(); ++k) {
    CHECK(b.field[k] >= a.field[k] - 1e-15);
    CHECK(a.field[k] >= lo.field[k] - 1e-15);
  }
}

TEST_CASE("value_at interpolates and checks range") {
  GridSolution s = solve(GridSpec{}, kButterfly, Side::Upper, 1.0, 2.0);
  CHECK(value_at(s, s.s_at(7), s.t_at(30)) == s.phi(30, 7));
  CHECK(value_at(s, 0.5 * (s.s_at(7) + s.s_at(8)), s.t_at(30)) ==
        doctest::Approx(0.5 * (s.phi(30, 7) + s.phi(30, 8))));
  CHECK(value_at(s, -2.0, 0.0) == evaluate_payoff(kButterfly, -2.0));
  CHECK_THROWS_AS(value_at(s, 2.5, 0.5), std::out_of_range);
  CHECK_THROWS_AS(value_at(s, 0.0, 1.5), std::out_of_range);
  // The first stored level is the payoff.
  for (std::size_t i = 0; i <= s.cells; ++i) CHECK(s.phi(0, i) == evaluate_payoff(kButterfly, s.s_at(i)));
}

TEST_CASE("convergence table") {
  MoveSpace tri = MoveSpace::parse("-1,1,2");
  ConvergenceTable t = converge_vs_lattice(tri, {1, 20, 100}, kButterfly, GridSpec{}, 5e-3);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].lattice_upper == 0.25);
  CHECK(t.rows[0].pde_upper == t.rows[2].pde_upper);
  CHECK(t.rows[2].gap_upper <= 5e-3);
  CHECK(t.rows[2].gap_lower <= 5e-3);
  CHECK(t.converged);

  ConvergenceTable c = converge_vs_lattice(tri, {1, 5}, parse_payoff("constant(1)"), GridSpec{}, 1e-12);
  for (const auto& row : c.rows) {
    CHECK(row.gap_upper == doctest::Approx(0.0));
    CHECK(row.gap_lower == doctest::Approx(0.0));
  }
}

TEST_CASE("summary json") {
  GridSolution s = solve(GridSpec{}, kButterfly, Side::Lower, 1.0, 2.0);
  nlohmann::json j = summary_json(s);
  CHECK(j["side"] == "lower");
  CHECK(j["grid"]["cells"] == 40);
  CHECK(j["value_at_origin"].get<double>() == doctest::Approx(value_at(s, 0.0, 1.0)));
}
