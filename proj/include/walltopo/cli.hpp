#pragma once

namespace walltopo {

/// Entry point behind the walltopo binary. Subcommands: run, render,
/// report. Returns 0 on success, 2 for input validation failures and 3
/// for runtime aborts.
int cli_main(int argc, char** argv);

}  // namespace walltopo
