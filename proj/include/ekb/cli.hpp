#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

namespace ekb::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kInputError = 1, kComputeError = 2 };

/// Runs the command line `args` (args[0] is the program name). Machine
/// output goes to `out`, human-readable summaries and errors to `err`.
int run(const std::vector<std::string_view>& args, std::ostream& out, std::ostream& err);

}  // namespace ekb::cli
