#pragma once

#include <ostream>

namespace eviz {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,  // bad flags, bad config, malformed input data
  kExitIo = 3,      // unreadable input, unwritable output, missing files
};

/// Entry point of the `eviz` tool: subcommands synth, convert, build-dataset,
/// eval and schedule.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eviz
