#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fusedsp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs the command line `args` (without the program name). Audio written to
/// "-" goes to `out`; tables and messages go to `out` and `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fusedsp::cli
