#pragma once

#include <iosfwd>

namespace adrl::cli {

/// Exit codes: 0 ok, 1 invalid input or failed check, 2 numerical divergence.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adrl::cli
