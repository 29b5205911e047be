#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlnet {

/// Exit codes: 0 success, 2 usage/config error, 3 data error, 4 internal
/// invariant violation.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitInternal = 4 };

/// Entry point of the `mlnet` command line; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlnet
