#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fractree {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConstraintFail = 2;

// Entry point behind the `fractree` executable; `args` excludes argv[0].
// Environment variable FRACTREE_OUT sets the default output directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fractree
