#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

namespace lingware {

/// Interned symbol id. Attribute names, atomic values and category
/// names all share one process-wide table.
using Symbol = std::uint32_t;

class SymbolTable {
public:
  static Symbol intern(std::string_view name) {
    auto& t = instance();
    {
      std::shared_lock lock(t.mutex_);
      if (auto it = t.index_.find(name); it != t.index_.end()) return it->second;
    }
    std::unique_lock lock(t.mutex_);
    if (auto it = t.index_.find(name); it != t.index_.end()) return it->second;
    t.names_.emplace_back(name);
    auto id = static_cast<Symbol>(t.names_.size() - 1);
    t.index_.emplace(std::string_view(t.names_.back()), id);
    return id;
  }

  static const std::string& name(Symbol s) {
    auto& t = instance();
    std::shared_lock lock(t.mutex_);
    return t.names_[s];
  }

private:
  static SymbolTable& instance() {
    static SymbolTable t;
    return t;
  }

  std::shared_mutex mutex_;
  std::deque<std::string> names_;  // deque keeps string storage stable
  std::unordered_map<std::string_view, Symbol> index_;
};

inline Symbol sym(std::string_view name) { return SymbolTable::intern(name); }
inline const std::string& sym_name(Symbol s) { return SymbolTable::name(s); }

}  // namespace lingware
