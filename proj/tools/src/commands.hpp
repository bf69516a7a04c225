#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace convcaps::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Parses `args` (without the program name) and runs the selected command.
/// Returns the process exit code; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace convcaps::cli
