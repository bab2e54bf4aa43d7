#pragma once

#include <string>
#include <vector>

namespace redreg {

// Full command-line entry point. Returns the process exit code:
// 0 success, 2 configuration/validation error, 3 diverged run,
// 4 malformed input data. Messages go to stderr.
int cli_main(int argc, const char* const* argv);

// Convenience overload for in-process tests; args excludes the program name.
int cli_main(const std::vector<std::string>& args);

}  // namespace redreg
