#pragma once

#include <iosfwd>

namespace infoseek {

// Exit codes: 0 success, 1 validation error (bad arguments, bad input files,
// replay divergence), 2 runtime failure.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace infoseek
