#pragma once

#include <string>
#include <vector>

namespace lfcycle {

/// Run the lfcycle command line. `args` excludes the program name.
/// Returns 0 on success, 2 on usage errors, 1 on runtime failures.
int run_cli(std::vector<std::string> args);

} // namespace lfcycle
