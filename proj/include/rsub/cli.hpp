#pragma once

#include <string>
#include <vector>

namespace rsub {

// Entry point behind main(). args excludes the program name. Returns the
// process exit code: 0 success, 1 validation/usage error, 2 estimation failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace rsub
