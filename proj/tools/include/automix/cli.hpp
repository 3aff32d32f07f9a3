#pragma once

#include <iosfwd>

namespace automix::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kProcessingError = 2 };

/// Entry point for the `automix` tool: subcommands mix, analyze, normalize.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace automix::cli
