#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace swirl::cli {

enum ExitCode : int { kOk = 0, kError = 1, kNotConverged = 2 };

/// Runs the command line `args` (args[0] is the program name) and returns
/// the process exit code. Progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swirl::cli
