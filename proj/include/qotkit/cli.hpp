#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qot::cli {

// Exit codes.
constexpr int kOk = 0;
constexpr int kViolations = 1;
constexpr int kInputError = 2;
constexpr int kSolverError = 3;

/// Runs one command line (without the program name). Never returns a code
/// outside {0, 1, 2, 3}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qot::cli
