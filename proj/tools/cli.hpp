#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drive::cli
{
    enum ExitCode : int
    {
        kOk = 0,
        kRunFailed = 1,   // finished with infractions or without completing
        kUsage = 2,
        kInputError = 3,  // missing, unreadable or malformed input file
        kRuntime = 4,     // runtime failure, replay divergence
    };

    // args excludes the program name. `serve` blocks until SIGINT/SIGTERM.
    int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
}
