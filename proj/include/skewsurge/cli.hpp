#pragma once

#include <string_view>

namespace skewsurge {

/// Entry point of the command-line tool; returns the process exit status.
int run_cli(int argc, const char* const* argv);

std::string_view tool_version();

}  // namespace skewsurge
