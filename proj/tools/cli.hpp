#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maner::cli {

enum ExitCode { kOk = 0, kPlannerFailure = 1, kUsageError = 2 };

/// Default output directory: $MANER_OUTPUT_DIR, else the working directory.
std::string default_output_dir();

/// Entry point behind the `maner` binary. `args` excludes the program name.
/// Machine-readable results go to `out`, log text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maner::cli
