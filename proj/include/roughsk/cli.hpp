#pragma once

namespace roughsk {

/// Command-line entry point. Subcommands: simulate, converge, holder,
/// average, check. Returns 0 on success, 1 on usage or config errors and 2
/// on runtime failures.
int cli_main(int argc, char** argv);

}  // namespace roughsk
