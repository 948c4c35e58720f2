#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace finsler::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNegative = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the command line `args` (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace finsler::cli
