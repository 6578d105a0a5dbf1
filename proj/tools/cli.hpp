#pragma once

#include <iosfwd>

namespace fedscreen::cli {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes: 0 success, 1 usage error, 2 pipeline error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fedscreen::cli
