#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rembed::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kSuccess = 0,
    kCheckFailed = 1,  // verification or metric threshold failure
    kUsageError = 2,   // bad flags, unreadable input, precondition violations
};

/// Runs the `rembed` command line with argv[0] omitted. Output that a script would
/// consume goes to `out`; diagnostics, warnings and stage timings go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rembed::cli
