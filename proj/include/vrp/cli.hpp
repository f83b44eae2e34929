#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vrp/errors.hpp"

namespace vrp {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitInfeasible = 3,
    kExitVerification = 4,
};

/// Maps a library error to the CLI exit code.
int exit_code_for(ErrorKind kind) noexcept;

/// Entry point of the `vrp` tool. args excludes the program name.
/// Results go to `out`, diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vrp
