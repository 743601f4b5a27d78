#pragma once

// Batch runner behind the `decoup` executable.
//
// Subcommands: caps, regions, verify-rescale, ratio-sweep, sharpness,
// trivial-check, bench. Every option is long-form. `--config FILE` reads a
// JSON object whose keys are option names (without dashes); options given on
// the command line win. CSV goes to --out (default: out), summaries to err.

#include <iosfwd>
#include <string>
#include <vector>

namespace decoup::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitConfig = 2;

inline constexpr int kCsvSchema = 1;
inline constexpr int kConfigSchema = 1;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace decoup::cli
