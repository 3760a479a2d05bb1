// Command-line front end. The binary in tools/ is a thin wrapper around
// run_cli so the subcommands are testable in-process.
#pragma once

#include <string>
#include <vector>

namespace airkit {

// argv-style invocation without the program name; returns the exit status.
int run_cli(const std::vector<std::string>& args);

}  // namespace airkit
