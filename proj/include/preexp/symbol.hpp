// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace preexp {

/// Interned program-variable name. Ids are dense and process-wide, so states
/// can be stored as flat arrays indexed by id.
class Symbol {
 public:
  Symbol() = default;
  explicit Symbol(std::string_view name);

  std::uint32_t id() const { return id_; }
  const std::string& name() const;

  friend bool operator==(Symbol, Symbol) = default;
  friend auto operator<=>(Symbol a, Symbol b) { return a.name() <=> b.name(); }

  static Symbol from_id(std::uint32_t id);

 private:
  std::uint32_t id_ = 0;
};

struct SymbolHash {
  std::size_t operator()(Symbol s) const noexcept { return s.id(); }
};

}  // namespace preexp
