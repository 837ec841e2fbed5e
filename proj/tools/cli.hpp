#pragma once

#include <ostream>

namespace fpc::cli {

/// Exit codes. `verify` reports its verdict through 0/1/2.
inline constexpr int kExitInBase = 0;
inline constexpr int kExitOutOfBase = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitError = 3;

/// Entry point for the `fpc` tool. Normal output goes to `out`, one-line
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fpc::cli
