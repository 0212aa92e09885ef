#pragma once

#include <iosfwd>

namespace fdr {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // a verification or --assert bound failed
  kExitConfig = 2,
  kExitCapacity = 3,
};

/// Runs `fdr <subcommand> ...` with argv[0] the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdr
