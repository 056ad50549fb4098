// SPDX-License-Identifier: Apache-2.0

#include "preexp/symbol.hpp"

#include <deque>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

namespace preexp {
namespace {

struct SymbolTable {
  std::shared_mutex mutex;
  // deque keeps references stable while the table grows.
  std::deque<std::string> names;
  std::unordered_map<std::string_view, std::uint32_t> ids;

  SymbolTable() {
    // Id 0 is the default-constructed symbol.
    names.emplace_back("");
    ids.emplace(names.back(), 0);
  }
};

SymbolTable& table() {
  static SymbolTable t;
  return t;
}

}  // namespace

Symbol::Symbol(std::string_view name) {
  auto& t = table();
  {
    std::shared_lock lock(t.mutex);
    if (auto it = t.ids.find(name); it != t.ids.end()) {
      id_ = it->second;
      return;
    }
  }
  std::unique_lock lock(t.mutex);
  if (auto it = t.ids.find(name); it != t.ids.end()) {
    id_ = it->second;
    return;
  }
  id_ = static_cast<std::uint32_t>(t.names.size());
  t.names.emplace_back(name);
  t.ids.emplace(t.names.back(), id_);
}

const std::string& Symbol::name() const {
  auto& t = table();
  std::shared_lock lock(t.mutex);
  return t.names[id_];
}

Symbol Symbol::from_id(std::uint32_t id) {
  auto& t = table();
  std::shared_lock lock(t.mutex);
  if (id >= t.names.size()) throw std::out_of_range("unknown symbol id");
  Symbol s;
  s.id_ = id;
  return s;
}

}  // namespace preexp
