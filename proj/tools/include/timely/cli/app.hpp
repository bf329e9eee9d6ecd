#ifndef TIMELY_CLI_APP_HPP
#define TIMELY_CLI_APP_HPP

#include <ostream>
#include <string>
#include <vector>

namespace timely::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,  ///< Unreadable or invalid input, bad flags, domain errors.
  kExitSolver = 3,
  kExitVerify = 4,
};

/// Runs the command line `args` (without the program name) and returns the
/// process exit code. Results go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace timely::cli

#endif  // TIMELY_CLI_APP_HPP
