#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deadbeat::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kNotControllable = 1,  // also: gain synthesis found the pair uncontrollable
    kInputError = 2,
    kSingularA = 3,
    kGuaranteeViolated = 4,
    kNumericalFailure = 5,
};

// Entry point of the `deadbeat` executable. args[0] is the program name.
// Never throws; every failure is mapped to an exit code with a diagnostic on err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deadbeat::cli
