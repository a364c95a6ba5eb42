#pragma once

#include <iosfwd>

namespace weibayes {

/// Command-line entry point. Returns 0 on success, 1 for usage or
/// validation errors, 2 for runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace weibayes
