#pragma once

#include <iosfwd>

namespace pcgrasp {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitSchema = 4,
};

/// Entry point of the `pcgrasp` tool. Subcommands: run, simulate, bench,
/// eval, export. Records and reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pcgrasp
