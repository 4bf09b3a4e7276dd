#pragma once

#include <string>
#include <vector>

namespace sheetlab::cli {

// Dispatches one invocation given the arguments after the program name.
// Returns 0 on success, 1 when a verdict came out false or a numerical run
// failed, 2 on usage errors.
int run(const std::vector<std::string>& args);

// main() adapter: skips argv[0].
int run(int argc, const char* const* argv);

}  // namespace sheetlab::cli
