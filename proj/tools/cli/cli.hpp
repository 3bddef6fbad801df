#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covar::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitIo = 3,
    kExitData = 4,
    kExitComputation = 5,
};

/// Runs the command line `covar <args...>`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace covar::cli
