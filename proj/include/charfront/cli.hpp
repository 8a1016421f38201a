#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace charfront {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,  // envelope, Lax, RH, hyperbolicity or oracle mismatch
    kExitDivergence = 3,
    kExitConfig = 4,
};

// Runs one subcommand; args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace charfront
