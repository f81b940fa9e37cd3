#include "superhedge/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "superhedge/errors.hpp"
#include "superhedge/induction.hpp"
#include "superhedge/singlestep.hpp"

namespace superhedge {
namespace {

constexpr double kPivotTolerance = 1e-11;
constexpr double kFeasibilityTolerance = 1e-9;

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double v = a(i, j);
      if (v == 0.0) continue;
      for (std::size_t p = 0; p < b.rows(); ++p) {
        for (std::size_t q = 0; q < b.cols(); ++q) out(i * b.rows() + p, j * b.cols() + q) = v * b(p, q);
      }
    }
  }
  return out;
}

DenseMatrix identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
  }
  return out;
}

std::uint64_t checked_rows(const MoveSpace& moves, int rounds, std::uint64_t budget) {
  if (rounds < 1) throw ValidationError("rounds must be >= 1");
  std::uint64_t rows = leaf_count(moves.size(), rounds);
  if (rows > budget) throw BudgetError("LP constraint matrix exceeds row budget", rows, budget);
  return rows;
}

std::string path_label(const MoveSpace& moves, std::uint64_t index, int length) {
  const std::uint64_t k = static_cast<std::uint64_t>(moves.size());
  std::vector<std::string> parts(static_cast<std::size_t>(length));
  for (int d = length - 1; d >= 0; --d) {
    parts[static_cast<std::size_t>(d)] = moves.moves()[index % k].to_string();
    index /= k;
  }
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ",";
    out += p;
  }
  return out;
}

/// Dense tableau for min c.y, T y = rhs, y >= 0 with a maintained basis.
///
/// The free-variable problem min c.x, A x >= b is transcribed by splitting
/// x = x+ - x- and adding one surplus s_r per row:
///     A_r x+ - A_r x- - s_r = b_r.
/// Rows with b_r < 0 are negated so that s_r enters the initial basis; the
/// others get an artificial variable that phase 1 drives to zero.
class Tableau {
 public:
  Tableau(const LpProblem& p) : m_(p.constraints.rows()), n_(p.constraints.cols()) {
    cols_ = 2 * n_ + 2 * m_;
    width_ = cols_ + 1;
    t_.assign(m_ * width_, 0.0);
    basis_.resize(m_);
    allowed_.assign(cols_, true);
    for (std::size_t r = 0; r < m_; ++r) {
      double sign = p.rhs[r] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) {
        at(r, j) = sign * p.constraints(r, j);
        at(r, n_ + j) = -sign * p.constraints(r, j);
      }
      at(r, surplus(r)) = -sign;
      at(r, cols_) = sign * p.rhs[r];
      if (sign < 0.0) {
        basis_[r] = surplus(r);
        allowed_[artificial(r)] = false;
      } else {
        at(r, artificial(r)) = 1.0;
        basis_[r] = artificial(r);
      }
    }
  }

  std::size_t surplus(std::size_t r) const { return 2 * n_ + r; }
  std::size_t artificial(std::size_t r) const { return 2 * n_ + m_ + r; }
  bool is_artificial(std::size_t j) const { return j >= 2 * n_ + m_; }

  /// Minimizes `cost` (one entry per column) with Bland's rule. Returns the
  /// optimal objective.
  double minimize(const std::vector<double>& cost, int& iterations) {
    std::vector<double> reduced(cost);
    double objective = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) reduced[j] -= cb * at(r, j);
      objective += cb * at(r, cols_);
    }

    const int max_iterations = 100000 + 50 * static_cast<int>(m_ + cols_);
    while (true) {
      std::size_t entering = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (allowed_[j] && reduced[j] < -kPivotTolerance) {
          entering = j;
          break;
        }
      }
      if (entering == cols_) return objective;

      std::size_t leaving = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        double a = at(r, entering);
        if (a <= kPivotTolerance) continue;
        double ratio = at(r, cols_) / a;
        if (ratio < best_ratio || (ratio == best_ratio && basis_[r] < basis_[leaving])) {
          best_ratio = ratio;
          leaving = r;
        }
      }
      if (leaving == m_) throw LpUnbounded("LP is unbounded below");

      pivot(leaving, entering);
      double factor = reduced[entering];
      for (std::size_t j = 0; j < cols_; ++j) reduced[j] -= factor * at(leaving, j);
      objective += factor * at(leaving, cols_);
      if (++iterations > max_iterations) throw NumericalError("simplex iteration limit reached");
    }
  }

  /// After phase 1: pivot remaining basic artificials out where possible and
  /// forbid artificials from re-entering.
  void retire_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!is_artificial(basis_[r])) continue;
      for (std::size_t j = 0; j < 2 * n_ + m_; ++j) {
        if (std::abs(at(r, j)) > kPivotTolerance) {
          pivot(r, j);
          break;
        }
      }
    }
    for (std::size_t r = 0; r < m_; ++r) allowed_[artificial(r)] = false;
  }

  std::vector<double> original_solution() const {
    std::vector<double> y(cols_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) y[basis_[r]] = at(r, cols_);
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = y[j] - y[n_ + j];
    return x;
  }

  std::size_t columns() const { return cols_; }
  std::size_t free_variables() const { return n_; }
  std::size_t rows() const { return m_; }

 private:
  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }

  void pivot(std::size_t row, std::size_t col) {
    double inv = 1.0 / at(row, col);
    for (std::size_t j = 0; j < width_; ++j) at(row, j) *= inv;
    at(row, col) = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == row) continue;
      double f = at(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(r, j) -= f * at(row, j);
      at(r, col) = 0.0;
    }
    basis_[row] = col;
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t cols_;
  std::size_t width_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  std::vector<bool> allowed_;
};

}  // namespace

LpProblem build_matrix(const MoveSpace& moves, int rounds, std::uint64_t row_budget) {
  checked_rows(moves, rounds, row_budget);
  const std::size_t k = static_cast<std::size_t>(moves.size());

  DenseMatrix column_a(k, 1);
  for (std::size_t i = 0; i < k; ++i) column_a(i, 0) = moves.moves()[i].to_double();
  DenseMatrix ones_k(k, 1);
  for (std::size_t i = 0; i < k; ++i) ones_k(i, 0) = 1.0;

  // hat = A_n without its leading column of ones.
  DenseMatrix hat = column_a;
  std::size_t block = 1;  // k^(n-1)
  for (int n = 2; n <= rounds; ++n) {
    block *= k;
    hat = hcat(kron(hat, ones_k), kron(identity(block), column_a));
  }

  LpProblem problem;
  DenseMatrix a(hat.rows(), hat.cols() + 1);
  for (std::size_t r = 0; r < hat.rows(); ++r) {
    a(r, 0) = 1.0;
    for (std::size_t c = 0; c < hat.cols(); ++c) a(r, c + 1) = hat(r, c);
  }
  problem.constraints = std::move(a);
  problem.objective.assign(problem.constraints.cols(), 0.0);
  problem.objective[0] = 1.0;

  problem.variable_names.push_back("alpha");
  std::uint64_t width = 1;
  for (int n = 1; n <= rounds; ++n) {
    for (std::uint64_t node = 0; node < width; ++node) {
      std::string name = "M" + std::to_string(n);
      if (n > 1) name += "|" + path_label(moves, node, n - 1);
      problem.variable_names.push_back(std::move(name));
    }
    width *= k;
  }
  return problem;
}

std::vector<double> payoff_vector(const GameSpec& game, const PayoffSpec& payoff, std::uint64_t row_budget) {
  const std::uint64_t rows = checked_rows(game.moves, game.rounds, row_budget);
  const std::uint64_t k = static_cast<std::uint64_t>(game.moves.size());
  std::vector<double> values(rows);
  std::vector<int> path(static_cast<std::size_t>(game.rounds));
  for (std::uint64_t r = 0; r < rows; ++r) {
    std::uint64_t index = r;
    for (int d = game.rounds - 1; d >= 0; --d) {
      path[static_cast<std::size_t>(d)] = static_cast<int>(index % k);
      index /= k;
    }
    values[r] = terminal_payoff(game, payoff, path);
  }
  return values;
}

LpSolution solve_min(const LpProblem& problem) {
  const std::size_t m = problem.constraints.rows();
  const std::size_t n = problem.constraints.cols();
  if (problem.rhs.size() != m || problem.objective.size() != n) {
    throw ValidationError("LP dimensions do not match");
  }

  Tableau tableau(problem);
  LpSolution out;

  std::vector<double> phase1(tableau.columns(), 0.0);
  bool needs_phase1 = false;
  double rhs_scale = 1.0;
  for (std::size_t r = 0; r < m; ++r) {
    rhs_scale = std::max(rhs_scale, std::abs(problem.rhs[r]));
    if (problem.rhs[r] >= 0.0) {
      phase1[tableau.artificial(r)] = 1.0;
      needs_phase1 = true;
    }
  }
  if (needs_phase1) {
    double infeasibility = tableau.minimize(phase1, out.iterations);
    if (infeasibility > kFeasibilityTolerance * rhs_scale) {
      throw LpInfeasible("LP is infeasible (phase-1 residual " + std::to_string(infeasibility) + ")");
    }
  }
  tableau.retire_artificials();

  std::vector<double> cost(tableau.columns(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    cost[j] = problem.objective[j];
    cost[n + j] = -problem.objective[j];
  }
  tableau.minimize(cost, out.iterations);

  out.solution = tableau.original_solution();
  out.optimum = 0.0;
  for (std::size_t j = 0; j < n; ++j) out.optimum += problem.objective[j] * out.solution[j];
  return out;
}

LpSolution lp_price(const GameSpec& game, const PayoffSpec& payoff, Side side, std::uint64_t row_budget) {
  LpProblem problem = build_matrix(game.moves, game.rounds, row_budget);
  problem.rhs = payoff_vector(game, side == Side::Upper ? payoff : payoff.negated(), row_budget);
  LpSolution sol = solve_min(problem);
  if (side == Side::Lower) sol.optimum = -sol.optimum;
  return sol;
}

double dual_vertex_enumerate(const MoveSpace& moves, int rounds, std::span<const double> path_values, Side side,
                             std::uint64_t budget) {
  const std::uint64_t k = static_cast<std::uint64_t>(moves.size());
  const std::uint64_t leaves = leaf_count(moves.size(), rounds);
  if (path_values.size() != leaves) throw ValidationError("need one payoff value per path");

  const std::uint64_t internal = (leaves - 1) / (k - 1);
  const std::uint64_t pairs = static_cast<std::uint64_t>(moves.pair_count());
  std::uint64_t combos = 1;
  for (std::uint64_t i = 0; i < internal && combos <= budget; ++i) combos *= pairs;
  if (combos > budget) throw BudgetError("dual vertex enumeration exceeds budget", combos, budget);

  const StepKernel kernel(moves);
  std::vector<std::size_t> assignment(internal, 0);

  // Node (depth d, lexicographic index r) has id (k^d - 1)/(k - 1) + r.
  auto expectation = [&](auto&& self, int depth, std::uint64_t index, std::uint64_t first_id) -> double {
    if (depth == rounds) return path_values[index];
    const auto& p = kernel.pairs()[assignment[first_id + index]];
    std::uint64_t next_first = first_id * k + 1;
    double v = 0.0;
    if (p.w_neg != 0.0) {
      v += p.w_neg * self(self, depth + 1, index * k + static_cast<std::uint64_t>(p.neg_move), next_first);
    }
    if (p.w_pos != 0.0) {
      v += p.w_pos * self(self, depth + 1, index * k + static_cast<std::uint64_t>(p.pos_move), next_first);
    }
    return v;
  };

  double best = expectation(expectation, 0, 0, 0);
  for (std::uint64_t c = 1; c < combos; ++c) {
    for (std::uint64_t i = 0; i < internal; ++i) {
      if (++assignment[i] < pairs) break;
      assignment[i] = 0;
    }
    double v = expectation(expectation, 0, 0, 0);
    best = side == Side::Upper ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

void dump_problem(const LpProblem& problem, std::ostream& out) {
  const auto& a = problem.constraints;
  out << "# dense LP: minimize objective . x subject to A x >= rhs, x free\n";
  out << "rows " << a.rows() << " cols " << a.cols() << "\n";
  out << "variables";
  for (const auto& name : problem.variable_names) out << ' ' << name;
  out << "\nobjective";
  out << std::setprecision(17);
  for (double c : problem.objective) out << ' ' << c;
  out << "\n";
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out << (c ? " " : "") << a(r, c);
    out << " >= " << (r < problem.rhs.size() ? problem.rhs[r] : 0.0) << "\n";
  }
}

}  // namespace superhedge
