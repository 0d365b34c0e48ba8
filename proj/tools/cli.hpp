#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace toricq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNoConvergence = 2;
inline constexpr int kExitUsage = 64;

/// Runs one subcommand; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a..b" (inclusive range) or "a,b,c".
std::vector<int> parse_levels(const std::string& text);

}  // namespace toricq::cli
