#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agnostic::cli {

/// Runs one command. `args` excludes the program name. Returns the process
/// exit status: 0 success, 1 data error, 2 numerical failure, 3 bad flags.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agnostic::cli
