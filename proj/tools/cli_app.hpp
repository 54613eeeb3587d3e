#pragma once

#include <ostream>

namespace examforge::cli {

// Exit codes: 0 success, 1 domain error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace examforge::cli
