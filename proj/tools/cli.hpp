#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;  // bad input, configuration or I/O
inline constexpr int kExitEngine = 3;   // sampler or optimizer failure

/// Runs the command line `args` (args[0] is the program name). Messages go
/// to `out` and `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssal::cli
