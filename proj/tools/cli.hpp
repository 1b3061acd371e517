#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lexrisk::cli {

/// Runs one command line. `args` excludes the program name. Returns the
/// process exit code: 0 on success, 1 on an operation error, 2 on bad usage.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexrisk::cli
