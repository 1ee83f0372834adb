#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dealer::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

/// Entry point of the dealerlab tool. `args` excludes the program name.
/// Diagnostics go to `err`, a short summary of written files to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Version string embedded in every report.
const char* version();

}  // namespace dealer::cli
