#pragma once

#include <iosfwd>

namespace banksim {

/// Entry point of the `banksim` tool. Returns 0 on success, 1 on a domain
/// error and 2 on a usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace banksim
