#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fermitherm {

// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,       // config, validation, box too large
  kExitRegularity = 2,   // symbol or spectrum outside ]0,1[
  kExitComputation = 3,  // any other failure inside a study stage
  kExitNonConvergence = 4,
};

// Entry point behind the `fermitherm` binary. `args` excludes the program name.
//
//   fermitherm <check-symbol|converge|maxent|weak-gibbs> --config PATH
//              [--out DIR] [--set key=value]... [--jobs N] [--verbose]
//
// Output files go to --out, else $FERMITHERM_OUT, else the working directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fermitherm
