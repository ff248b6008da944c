#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace specklab::cli {

enum ExitCode : int { kSuccess = 0, kUserError = 1, kInternalError = 2 };

/// Parses `args` (without the program name), prints the resolved configuration
/// to `out`, and runs the selected subcommand. Diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// argv-style entry point for main().
int dispatch(int argc, const char* const* argv);

}  // namespace specklab::cli
