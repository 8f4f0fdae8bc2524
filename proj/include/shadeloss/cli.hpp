#pragma once

#include <iosfwd>

namespace shadeloss {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitWarning = 2;

/// Entry point of the `shadeloss` tool: subcommands corpus, analyze, synth, validate.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shadeloss
