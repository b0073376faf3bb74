#pragma once

#include <iosfwd>

namespace fracvar::cli {

inline constexpr int kExitOk = 0;
/// Unexpected failure, or a verification suite with failing checks.
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNonConvergence = 3;

/// Parses the command line, runs the subcommand and returns the exit code.
/// Subcommands: run, verify, measure-table, export-model.
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fracvar::cli
