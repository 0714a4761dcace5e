#pragma once

#include <string>
#include <vector>

namespace siselab::cli {

// Exit codes shared by every subcommand.
//   0 ok / stable     2 unstable      3 marginal
//   1 usage or I/O    4 engine or assumption mismatch
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnstable = 2;
inline constexpr int kExitMarginal = 3;
inline constexpr int kExitEngineMismatch = 4;

// Parses argv-style arguments and runs one subcommand
// (simulate | analyze | filter | factorize | bench). Never throws: user
// errors become exit codes with a one-line message on stderr.
int run(const std::vector<std::string>& args);

int run(int argc, char** argv);

}  // namespace siselab::cli
