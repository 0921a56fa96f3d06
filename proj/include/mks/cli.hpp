#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace mks::cli {

/// Process exit codes.
enum ExitCode : int {
    ok = 0,
    usage = 2,
    io_failure = 3,
    parse_failure = 4,
    numeric_failure = 5,
};

/// Runs `mks <subcommand> ...`; args excludes the program name. Outputs are
/// produced in memory and renamed into place only when the whole subcommand
/// succeeds.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace mks::cli
