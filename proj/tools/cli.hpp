#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ppset::cli {

// Process exit codes; scripts branch on these.
enum ExitCode : int {
    kOk = 0,
    kFailed = 1,      // a validation suite failed, or an unexpected runtime error
    kInputError = 2,  // bad flags, malformed or invalid input files
    kAbstain = 3,     // calibration found no risk-controlling lambda
    kExecutorError = 4,
};

// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ppset::cli
