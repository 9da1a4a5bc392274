#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hyploop::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kNoSolution = 2;  // nonexistence evidence or no critical point
inline constexpr int kBadInput = 3;    // parse or configuration error
inline constexpr int kNumerical = 4;   // solver or quadrature failure

/// Runs one command line (args excludes the program name). Reports go to
/// `out`, the one-line summary and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hyploop::cli
