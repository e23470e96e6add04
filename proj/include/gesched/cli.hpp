#pragma once

namespace gesched {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_assumption = 2,
  exit_nonconvergence = 3,
  exit_verification = 4,
};

/// Entry point of the `gesched` tool. Subcommands: solve, verify, simulate,
/// compare, sweep. Never throws; every failure maps to an ExitCode.
int run_cli(int argc, char** argv);

}  // namespace gesched
