#pragma once

#include <iosfwd>

namespace ects::cli {

/// Exit codes of the `ects` tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;

/// Parses `argv` and runs one subcommand (generate, run, sweep, timing).
/// Normal output goes to `out`, diagnostics to `err`; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ects::cli
