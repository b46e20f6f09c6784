#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ocmc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolverFailure = 3;

// Runs one subcommand; args excludes the program name. Reports go to `out`
// unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ocmc
