#pragma once

#include <iosfwd>

namespace otguide::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInputError = 2,      // configuration, parse or missing-input failures
    kNumericalError = 3,  // nonconvergence under --strict, singular gradients
};

// Entry point behind the `otguide` executable: subcommands solve, optimize,
// diagnose and compare. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace otguide::cli
