// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>

#include "preexp/syntax.hpp"

namespace preexp {

struct UnfoldOptions {
  std::size_t depth = 0;
  /// Overrides keyed by the pre-order index of a While node (0 = first loop
  /// encountered reading the source top to bottom).
  std::map<std::size_t, std::size_t> per_loop;
};

/// Replaces every loop by its n-th approximation: while^0 = diverge and
/// while^{n+1}(p){B} = if(p){B; while^n(p){B}}. Inner loops are unfolded
/// first, so the result is While-free.
StmtPtr unfold_while(const StmtPtr& s, std::size_t depth);
StmtPtr unfold_while(const StmtPtr& s, const UnfoldOptions& options);

/// Number of While nodes in s.
std::size_t count_loops(const Stmt& s);

/// Replaces each score(E) with `u :~ U; observe(0 < E && E <= 1 && u <= E)`
/// using a fresh u per site.
StmtPtr noscore(const StmtPtr& s, FreshNames& fresh);
StmtPtr noscore(const StmtPtr& s);

}  // namespace preexp
