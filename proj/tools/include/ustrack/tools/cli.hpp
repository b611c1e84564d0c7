#pragma once

#include <string>
#include <vector>

namespace ustrack::tools {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // processing error
inline constexpr int kExitUsage = 2;

/// Runs one `ustrack <subcommand> ...` invocation. args[0] is the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace ustrack::tools
