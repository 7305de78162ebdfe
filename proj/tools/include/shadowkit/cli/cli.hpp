#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shadowkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (without the program name). Results go to
/// `out`, diagnostics and progress to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shadowkit::cli
