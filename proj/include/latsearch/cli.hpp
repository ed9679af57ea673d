#pragma once

#include <string>
#include <vector>

#include "latsearch/strategy.hpp"

namespace latsearch {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

/// Parses "3", "3/4" or "0.75" exactly.
Speed parse_rational(const std::string& text);
std::vector<Speed> parse_speeds(const std::string& text);

/// Runs one subcommand (plan, verify, search, flow, simulate) and returns the exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace latsearch
