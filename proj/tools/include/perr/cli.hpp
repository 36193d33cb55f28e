#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace perr::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalError = 3,
};

/// Runs one command line (without the program name). Reports go to files under
/// --out; human-readable progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version();

}  // namespace perr::cli
