#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trek/error.hpp"

namespace trek {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitDetector = 4;
inline constexpr int kExitInternal = 5;

int exit_code(ErrorKind kind);

/// Entry point of the `seetrek` executable. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace trek
