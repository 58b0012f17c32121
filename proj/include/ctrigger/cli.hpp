#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ctrigger {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitValidation = 2 };

/// Entry point for the `ctrigger` tool. `args` excludes the program name.
/// Subcommands: synth, indicator, trigger, sweep-tau, sweep-samples,
/// adaptive.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctrigger
