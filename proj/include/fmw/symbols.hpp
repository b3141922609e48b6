#pragma once

#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fmw {

using SymId = int;

/// Process-wide interning of variable and symbol names. Ids are dense and
/// stable for the lifetime of the process.
class SymbolTable {
public:
  static SymbolTable& instance() {
    static SymbolTable table;
    return table;
  }

  SymId intern(std::string_view name) {
    std::lock_guard lock(mu_);
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    SymId id = static_cast<SymId>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
  }

  std::string name(SymId id) const {
    std::lock_guard lock(mu_);
    return names_.at(static_cast<std::size_t>(id));
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return names_.size();
  }

private:
  SymbolTable() = default;
  mutable std::mutex mu_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, SymId> ids_;
};

inline SymId intern(std::string_view name) { return SymbolTable::instance().intern(name); }
inline std::string sym_name(SymId id) { return SymbolTable::instance().name(id); }

} // namespace fmw
