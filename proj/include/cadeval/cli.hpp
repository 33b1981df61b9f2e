#pragma once

namespace cadeval {

/// Full command-line entry point, callable in-process for tests.
/// Returns 0 on success, 1 on validation errors (bad input data or
/// configuration), 2 on usage errors (unknown flags, missing subcommand).
int dispatch(int argc, const char* const* argv);

}  // namespace cadeval
