// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace preexp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitInfeasible = 2;

/// Entry point of the `preexp` tool. JSON lines go to `out`, diagnostics to
/// `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace preexp
