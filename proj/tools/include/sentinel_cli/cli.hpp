#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sentinel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitThreshold = 1;  // threshold not met or delivery failed
inline constexpr int kExitInput = 2;      // bad arguments, files, or data

// Parses `args` (without the program name) and runs the subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sentinel::cli
