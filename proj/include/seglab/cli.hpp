#pragma once

namespace seglab {

/// Process exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNotConverged = 2,
  kExitFail = 3,
  kExitInconclusive = 4,
};

/// Entry point of the seglab tool: subcommands minimize, partition,
/// verify <name>, sweep and eig.
int run_cli(int argc, char** argv);

}  // namespace seglab
