#pragma once

namespace rangewalk::cli {

/// Exit codes of the command line.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kInvalid = 2,   // config, validation, usage, unsupported input, precision
  kResource = 3,  // a state/path/work cap was hit
  kAssertion = 4, // --assert and a check failed
};

/// Parses argv, runs one subcommand and maps errors to exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace rangewalk::cli
