#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace noisewarp::cli {

// Exit codes are part of the command-line contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;        // unreadable, malformed or inconsistent inputs
inline constexpr int kExitUsage = 2;       // missing, unknown or contradictory flags
inline constexpr int kExitValidation = 3;  // a statistical check or replay comparison failed

/// Runs one command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace noisewarp::cli
