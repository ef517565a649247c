#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace softbody::cli {

/// Runs the command line `args` (without the program name).
/// Returns 0 on success, 2 for usage errors and 1 for runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace softbody::cli
