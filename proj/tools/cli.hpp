#pragma once

#include <iosfwd>

namespace superhedge::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kValidation = 2,
  kBudget = 3,
  kVerification = 4,
};

/// Parses argv and runs one subcommand. Primary output goes to `out` unless
/// --output names a file; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace superhedge::cli
