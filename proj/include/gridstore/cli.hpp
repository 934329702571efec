#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gridstore::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInvalidScenario = 3;
inline constexpr int kExitNotConverged = 4;

/// Entry point for the gridstore command line; args exclude the program name.
/// Subcommands: validate, solve-cgt, solve-pt, enumerate, sweep, find-price.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridstore::cli
