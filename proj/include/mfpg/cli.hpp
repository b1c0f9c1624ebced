#pragma once

#include <iosfwd>

namespace mfpg::cli {

enum ExitCode : int { ok = 0, validation_failure = 1, runtime_failure = 2 };

/// Routes argv to a subcommand. Exit 0 on success, 1 on validation failure
/// (bad flags, malformed config, missing files), 2 on runtime or check failure.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mfpg::cli
