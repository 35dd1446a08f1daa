#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deepesn::cli {

enum ExitCode : int {
    kSuccess = 0,
    kRuntimeFailure = 1,
    kUsageError = 2,
    kPartialCompletion = 3,  ///< benchmark finished but some requested tasks were skipped or failed
};

/// Environment variable consulted when --laser-file is not given.
inline constexpr const char* kLaserEnvVar = "DEEPESN_LASER_FILE";

/// Entry point for the `deepesn` tool: subcommands generate, eval and benchmark.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deepesn::cli
