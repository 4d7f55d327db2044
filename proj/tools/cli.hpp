#pragma once

#include <iosfwd>

namespace retarget {

/// Entry point of the `retarget` tool. The single JSON result goes to `out`,
/// log lines to `err`. Returns 0 on success, 2 on bad usage, 3 on bad data
/// and 4 on numeric failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace retarget
