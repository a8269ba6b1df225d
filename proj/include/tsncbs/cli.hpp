#pragma once

#include <ostream>

namespace tsncbs {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitUnschedulable = 2,
  kExitInfeasible = 3,
  kExitBudgetExceeded = 4,
  kExitDominanceViolation = 5,
  kExitPreconditionViolated = 6,
};

/// Entry point of `tsncbs analyze|deploy|compare|simulate <config> [flags]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tsncbs
