#pragma once

#include <iosfwd>

namespace crowdsoft::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNumericalFailure = 2;

// Entry point for `crowdsoft <label|aggregate|evaluate|synth> ...`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crowdsoft::cli
