#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tmkit {

enum ExitStatus : int { kExitOk = 0, kExitErrors = 1, kExitUsage = 2 };

/// Runs the command line tool. `args` excludes the program name. A file
/// argument of "-" reads from `in`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace tmkit
