#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace twolocus::cli {

enum ExitCode : int { ok = 0, verification_failure = 1, usage_error = 2, capability_error = 3 };

/// Runs the command line `args` (without the program name) and returns the
/// process exit code. Results go to `out`, diagnostics to `err`.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twolocus::cli
