#pragma once

namespace smoothgreed::cli {

/// Parses argv and dispatches to the subcommands; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace smoothgreed::cli
