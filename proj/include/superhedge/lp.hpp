#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "superhedge/model.hpp"

namespace superhedge {

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// min objective . x  s.t.  constraints * x >= rhs, x free.
struct LpProblem {
  std::vector<double> objective;
  DenseMatrix constraints;
  std::vector<double> rhs;
  std::vector<std::string> variable_names;
};

struct LpSolution {
  double optimum = 0.0;
  std::vector<double> solution;
  int iterations = 0;
};

class LpInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LpUnbounded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultLpRowBudget = 4096;
inline constexpr std::uint64_t kDefaultVertexBudget = 1'000'000;

/// Superreplication LP for an N-round game: the k^N x (1 + (k^N-1)/(k-1))
/// matrix A_N built by its Kronecker recursion, objective selecting alpha,
/// variable names alpha, M1, M2|a, ... . Rows follow lexicographic path order
/// over ascending moves. rhs is left empty.
LpProblem build_matrix(const MoveSpace& moves, int rounds, std::uint64_t row_budget = kDefaultLpRowBudget);

/// Payoff f(xi) over all k^N paths in lexicographic order.
std::vector<double> payoff_vector(const GameSpec& game, const PayoffSpec& payoff,
                                  std::uint64_t row_budget = kDefaultLpRowBudget);

/// Bland-rule two-phase primal simplex. Throws LpInfeasible / LpUnbounded.
LpSolution solve_min(const LpProblem& problem);

/// Upper (or, via -f, lower) hedging price through the LP route.
LpSolution lp_price(const GameSpec& game, const PayoffSpec& payoff, Side side,
                    std::uint64_t row_budget = kDefaultLpRowBudget);

/// Brute-force maximum (Upper) or minimum (Lower) over every assignment of
/// a basic pair to every internal tree node of the product-measure
/// expectation of `path_values` (lexicographic path order).
double dual_vertex_enumerate(const MoveSpace& moves, int rounds, std::span<const double> path_values,
                             Side side = Side::Upper, std::uint64_t budget = kDefaultVertexBudget);

/// Plain-text dense dump: header with dimensions, variable names,
/// objective, then one "coefficients >= rhs" line per row.
void dump_problem(const LpProblem& problem, std::ostream& out);

}  // namespace superhedge
