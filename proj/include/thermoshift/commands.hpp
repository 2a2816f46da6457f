#pragma once

#include <ostream>

#include "thermoshift/config.hpp"

namespace thermoshift {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  /// Unconverged estimate, failed certificate or validator, unresolved root.
  kExitUnconverged = 2,
  kExitDivergent = 3,
  /// The computation itself raised an error (non-mixing truncation, bad bracket, ...).
  kExitComputation = 4,
};

/// Runs one subcommand, writing CSV artifacts and run.json into config.out_dir
/// and a key=value summary to `out`. Errors are reported on `err`.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Same, with the model file already parsed.
int run_command(const RunConfig& config, const ModelSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace thermoshift
