#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace superhedge {

/// Input that violates a documented precondition (bad move space, unstable grid, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponential enumeration that would exceed its configured budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::uint64_t required, std::uint64_t budget)
      : std::runtime_error(what + " (required " + std::to_string(required) +
                           ", budget " + std::to_string(budget) + ")"),
        required_(required),
        budget_(budget) {}

  std::uint64_t required() const { return required_; }
  std::uint64_t budget() const { return budget_; }

 private:
  std::uint64_t required_;
  std::uint64_t budget_;
};

/// A numerical procedure produced NaN/inf or otherwise failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace superhedge
