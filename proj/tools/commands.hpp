#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace granularity::cli {

/// Stable exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kAssertionFailed = 1,
  kValidationError = 2,
  kComputeError = 3,
};

/// Runs one command line (args[0] is the program name). Reports go to the
/// files named by the arguments, or to `out` when no output path is given;
/// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace granularity::cli
