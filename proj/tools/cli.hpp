#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hdcov::cli {

/// Runs one invocation. Returns 0 on success, 1 on a computation error (or
/// failed mc assertions) and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace hdcov::cli
