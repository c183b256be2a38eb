#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qae::cli {

/// Exit codes returned by run().
inline constexpr int kOk = 0;
inline constexpr int kNotConverged = 1;
inline constexpr int kUsage = 2;

/// Parses `args` (without the program name) and runs one subcommand:
/// solve, closed-form, verify, tail, poa, simulate-cost.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qae::cli
