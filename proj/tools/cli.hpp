#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace corebank::cli {

// Runs the corebank command line (args excludes the program name). Returns
// the process exit code: 0 success, 1 runtime or I/O failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace corebank::cli
