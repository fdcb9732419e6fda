#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ccf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitData = 2;

/// Runs `ccf <subcommand> ...`. `args` excludes the program name.
/// Returns 0 on success, 2 on data errors (missing or malformed input,
/// class imbalance), 1 on anything else.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccf::cli
