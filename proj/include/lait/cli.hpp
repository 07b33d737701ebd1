#pragma once

#include <string>
#include <vector>

namespace lait {

inline constexpr const char* kToolVersion = "lait 0.1.0";

// Exit codes: 0 success, 1 verification failure or runtime error, 2 usage
// error (bad flags, bad config, malformed input files).
int run_cli(const std::vector<std::string>& args);

}  // namespace lait
