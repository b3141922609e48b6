#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/relation.hpp"
#include "fmw/symbols.hpp"

namespace fmw {

/// Smallest k with 2^k >= n (0 for n <= 1).
inline std::size_t ceil_log2(std::size_t n) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

inline std::size_t floor_log2(std::size_t n) {
  std::size_t k = 0;
  while ((n >> (k + 1)) != 0) ++k;
  return k;
}

struct RelSymbol {
  std::string name;
  std::size_t arity = 0;
  bool builtin = false;
  friend bool operator==(const RelSymbol&, const RelSymbol&) = default;
};

struct ConstSymbol {
  std::string name;
  bool builtin = false;
  friend bool operator==(const ConstSymbol&, const ConstSymbol&) = default;
};

inline const std::vector<RelSymbol>& builtin_relations() {
  static const std::vector<RelSymbol> r = {
      {"<", 2, true}, {"PLUS", 3, true}, {"TIMES", 3, true}, {"BIT", 2, true}, {"SUC", 2, true}};
  return r;
}

inline const std::vector<std::string>& builtin_constants() {
  static const std::vector<std::string> c = {"0", "1", "max"};
  return c;
}

/// Relation and constant symbols. With built-ins enabled the numeric symbols
/// <, PLUS, TIMES, BIT, SUC, 0, 1, max are appended and flagged.
class Vocabulary {
public:
  Vocabulary() = default;

  Vocabulary(std::vector<std::pair<std::string, std::size_t>> relations, std::vector<std::string> constants,
             bool builtins = false)
      : builtins_(builtins) {
    std::set<std::string> seen;
    auto claim = [&](const std::string& name) {
      if (name.empty()) throw Error("empty symbol name");
      if (!seen.insert(name).second) throw Error("duplicate symbol '" + name + "' in vocabulary");
    };
    for (auto& [name, arity] : relations) {
      if (arity < 1) throw Error("relation '" + name + "' must have positive arity");
      claim(name);
      relations_.push_back({name, arity, false});
    }
    for (auto& name : constants) {
      claim(name);
      constants_.push_back({name, false});
    }
    if (builtins) {
      for (const auto& r : builtin_relations()) {
        claim(r.name);
        relations_.push_back(r);
      }
      for (const auto& c : builtin_constants()) {
        claim(c);
        constants_.push_back({c, true});
      }
    }
  }

  bool has_builtins() const { return builtins_; }
  const std::vector<RelSymbol>& relations() const { return relations_; }
  const std::vector<ConstSymbol>& constants() const { return constants_; }

  std::optional<std::size_t> relation_index(const std::string& name) const {
    for (std::size_t i = 0; i < relations_.size(); ++i)
      if (relations_[i].name == name) return i;
    return std::nullopt;
  }
  std::optional<std::size_t> constant_index(const std::string& name) const {
    for (std::size_t i = 0; i < constants_.size(); ++i)
      if (constants_[i].name == name) return i;
    return std::nullopt;
  }

  /// Declared (non-builtin) symbols only, in declaration order.
  std::vector<RelSymbol> user_relations() const {
    std::vector<RelSymbol> out;
    for (const auto& r : relations_)
      if (!r.builtin) out.push_back(r);
    return out;
  }
  std::vector<std::string> user_constants() const {
    std::vector<std::string> out;
    for (const auto& c : constants_)
      if (!c.builtin) out.push_back(c.name);
    return out;
  }

  /// Ordered means < is available, either built in or declared.
  bool is_ordered() const { return relation_index("<").has_value(); }

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

private:
  bool builtins_ = false;
  std::vector<RelSymbol> relations_;
  std::vector<ConstSymbol> constants_;
};

inline Relation builtin_relation(const std::string& name, std::size_t n) {
  const auto e = [](std::size_t v) { return static_cast<Element>(v); };
  if (name == "<") {
    Relation r(2, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) r.insert(Tuple{e(i), e(j)});
    return r;
  }
  if (name == "SUC") {
    Relation r(2, n);
    for (std::size_t i = 0; i + 1 < n; ++i) r.insert(Tuple{e(i), e(i + 1)});
    return r;
  }
  if (name == "BIT") {
    Relation r(2, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n && j < 63; ++j)
        if ((i >> j) & 1U) r.insert(Tuple{e(i), e(j)});
    return r;
  }
  if (name == "PLUS" || name == "TIMES") {
    Relation r(3, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        std::size_t k = name == "PLUS" ? i + j : i * j;
        if (k < n) r.insert(Tuple{e(i), e(j), e(k)});
      }
    return r;
  }
  throw Error("unknown built-in relation " + name);
}

/// A finite structure over {0..n-1}. Immutable after construction.
class Structure {
public:
  Structure() = default;

  Structure(Vocabulary vocab, std::size_t n, const std::map<std::string, std::vector<Tuple>>& rels,
            const std::map<std::string, Element>& consts)
      : vocab_(std::move(vocab)), n_(n) {
    if (n == 0) throw Error("structure size must be at least 1");
    if (vocab_.has_builtins() && n < 2) throw Error("built-in numeric symbols require size at least 2");
    for (const auto& [name, _] : rels)
      if (!vocab_.relation_index(name) || vocab_.relations()[*vocab_.relation_index(name)].builtin)
        throw Error("interpretation given for unknown relation '" + name + "'");
    for (const auto& [name, _] : consts)
      if (!vocab_.constant_index(name) || vocab_.constants()[*vocab_.constant_index(name)].builtin)
        throw Error("interpretation given for unknown constant '" + name + "'");
    for (const auto& sym : vocab_.relations()) {
      if (sym.builtin) {
        add_relation(sym.name, builtin_relation(sym.name, n));
        continue;
      }
      auto it = rels.find(sym.name);
      if (it == rels.end()) throw Error("missing interpretation for relation '" + sym.name + "'");
      Relation r(sym.arity, n);
      for (const auto& t : it->second) {
        if (t.size() != sym.arity)
          throw Error("wrong arity for '" + sym.name + "': expected " + std::to_string(sym.arity) + ", got " +
                      std::to_string(t.size()));
        for (Element x : t)
          if (x < 0 || static_cast<std::size_t>(x) >= n)
            throw Error("entry " + std::to_string(x) + " out of range in relation '" + sym.name + "'");
        r.insert(t);
      }
      add_relation(sym.name, std::move(r));
    }
    for (const auto& sym : vocab_.constants()) {
      Element v;
      if (sym.builtin) {
        v = sym.name == "0" ? 0 : sym.name == "1" ? 1 : static_cast<Element>(n - 1);
      } else {
        auto it = consts.find(sym.name);
        if (it == consts.end()) throw Error("missing interpretation for constant '" + sym.name + "'");
        v = it->second;
        if (v < 0 || static_cast<std::size_t>(v) >= n)
          throw Error("constant '" + sym.name + "' value " + std::to_string(v) + " out of range");
      }
      const_ids_.push_back(intern(sym.name));
      const_vals_.push_back(v);
    }
  }

  /// Build directly from relations already in dense form.
  static Structure from_relations(Vocabulary vocab, std::size_t n, std::vector<Relation> user_rels,
                                  std::vector<Element> user_consts) {
    Structure s;
    s.vocab_ = std::move(vocab);
    s.n_ = n;
    if (n == 0) throw Error("structure size must be at least 1");
    if (s.vocab_.has_builtins() && n < 2) throw Error("built-in numeric symbols require size at least 2");
    std::size_t ri = 0, ci = 0;
    for (const auto& sym : s.vocab_.relations()) {
      if (sym.builtin) {
        s.add_relation(sym.name, builtin_relation(sym.name, n));
      } else {
        if (ri >= user_rels.size()) throw Error("missing relation '" + sym.name + "'");
        if (user_rels[ri].arity() != sym.arity || user_rels[ri].universe_size() != n)
          throw Error("relation '" + sym.name + "' has wrong shape");
        s.add_relation(sym.name, std::move(user_rels[ri++]));
      }
    }
    for (const auto& sym : s.vocab_.constants()) {
      Element v;
      if (sym.builtin) {
        v = sym.name == "0" ? 0 : sym.name == "1" ? 1 : static_cast<Element>(n - 1);
      } else {
        if (ci >= user_consts.size()) throw Error("missing constant '" + sym.name + "'");
        v = user_consts[ci++];
        if (v < 0 || static_cast<std::size_t>(v) >= n) throw Error("constant '" + sym.name + "' out of range");
      }
      s.const_ids_.push_back(intern(sym.name));
      s.const_vals_.push_back(v);
    }
    return s;
  }

  const Vocabulary& vocab() const { return vocab_; }
  std::size_t size() const { return n_; }

  const Relation* find_relation(SymId id) const {
    auto it = rel_index_.find(id);
    return it == rel_index_.end() ? nullptr : &rels_[it->second];
  }
  const Relation& relation(const std::string& name) const {
    const Relation* r = find_relation(intern(name));
    if (!r) throw Error("structure has no relation '" + name + "'");
    return *r;
  }
  std::optional<Element> find_constant(SymId id) const {
    for (std::size_t i = 0; i < const_ids_.size(); ++i)
      if (const_ids_[i] == id) return const_vals_[i];
    return std::nullopt;
  }
  Element constant(const std::string& name) const {
    auto v = find_constant(intern(name));
    if (!v) throw Error("structure has no constant '" + name + "'");
    return *v;
  }

  /// Relations in vocabulary order (built-ins included).
  const std::vector<Relation>& relations() const { return rels_; }
  const std::vector<Element>& constant_values() const { return const_vals_; }

  friend bool operator==(const Structure& a, const Structure& b) {
    return a.vocab_ == b.vocab_ && a.n_ == b.n_ && a.rels_ == b.rels_ && a.const_vals_ == b.const_vals_;
  }

private:
  void add_relation(const std::string& name, Relation r) {
    rel_index_[intern(name)] = rels_.size();
    rels_.push_back(std::move(r));
  }

  Vocabulary vocab_;
  std::size_t n_ = 0;
  std::vector<Relation> rels_;
  std::unordered_map<SymId, std::size_t> rel_index_;
  std::vector<SymId> const_ids_;
  std::vector<Element> const_vals_;
};

inline Structure new_structure(const Vocabulary& vocab, std::size_t n,
                               const std::map<std::string, std::vector<Tuple>>& rels,
                               const std::map<std::string, Element>& consts) {
  return Structure(vocab, n, rels, consts);
}

/// Linear order of size n, vocabulary {<} plus the given constants at 0 and n-1
/// when requested (named "min" and "max" as in ordered structures with endpoints).
inline Structure linear_order(std::size_t n, bool with_endpoints = false) {
  std::vector<std::string> consts;
  std::map<std::string, Element> cv;
  if (with_endpoints) {
    consts = {"min", "max"};
    cv = {{"min", 0}, {"max", static_cast<Element>(n) - 1}};
  }
  Vocabulary v({{"<", 2}}, consts, false);
  std::vector<Tuple> lt;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) lt.push_back({static_cast<Element>(i), static_cast<Element>(j)});
  return Structure(v, n, {{"<", lt}}, cv);
}

/// Structure with only the built-in numeric symbols.
inline Structure builtin_structure(std::size_t n) { return Structure(Vocabulary({}, {}, true), n, {}, {}); }

/// Word model: positions 0..|w|-1 ordered by a declared <, one unary relation per
/// listed symbol. With no explicit names every alphabet symbol c gets relation "P<c>".
inline Structure word_structure(const std::string& text, const std::string& alphabet,
                                std::vector<std::pair<char, std::string>> names = {}) {
  if (text.empty()) throw Error("word must be nonempty");
  for (char c : text)
    if (alphabet.find(c) == std::string::npos) throw Error(std::string("character '") + c + "' not in alphabet");
  if (names.empty())
    for (char c : alphabet) names.push_back({c, std::string("P") + c});
  std::vector<std::pair<std::string, std::size_t>> rels = {{"<", 2}};
  for (auto& [c, name] : names) rels.push_back({name, 1});
  Vocabulary v(rels, {}, false);
  std::map<std::string, std::vector<Tuple>> interp;
  auto& lt = interp["<"];
  for (std::size_t i = 0; i < text.size(); ++i)
    for (std::size_t j = i + 1; j < text.size(); ++j) lt.push_back({static_cast<Element>(i), static_cast<Element>(j)});
  for (auto& [c, name] : names) {
    auto& r = interp[name];
    for (std::size_t i = 0; i < text.size(); ++i)
      if (text[i] == c) r.push_back({static_cast<Element>(i)});
  }
  return Structure(v, text.size(), interp, {});
}

/// Undirected cycle on {0..l} with edge relation E closed under swap.
inline Structure cycle_graph(std::size_t l) {
  if (l == 0) throw Error("cycle parameter must be at least 1");
  std::set<Tuple> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    edges.insert({static_cast<Element>(a), static_cast<Element>(b)});
    edges.insert({static_cast<Element>(b), static_cast<Element>(a)});
  };
  for (std::size_t i = 0; i < l; ++i) add(i, i + 1);
  add(0, l);
  return Structure(Vocabulary({{"E", 2}}, {}, false), l + 1, {{"E", {edges.begin(), edges.end()}}}, {});
}

/// Directed path 0 -> 1 -> ... -> n-1 over {E/2}, optionally with constants s=0, t=n-1.
inline Structure path_graph(std::size_t n, bool with_endpoints = false) {
  std::vector<Tuple> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({static_cast<Element>(i), static_cast<Element>(i + 1)});
  if (!with_endpoints) return Structure(Vocabulary({{"E", 2}}, {}, false), n, {{"E", e}}, {});
  return Structure(Vocabulary({{"E", 2}}, {"s", "t"}, false), n, {{"E", e}},
                   {{"s", 0}, {"t", static_cast<Element>(n) - 1}});
}

inline Structure disjoint_union(const Structure& a, const Structure& b) {
  if (!(a.vocab() == b.vocab())) throw Error("disjoint union needs identical vocabularies");
  if (a.vocab().has_builtins()) throw Error("disjoint union is undefined with built-in symbols");
  if (!a.vocab().constants().empty()) throw Error("disjoint union is undefined with constants");
  const auto shift = static_cast<Element>(a.size());
  std::map<std::string, std::vector<Tuple>> rels;
  for (std::size_t i = 0; i < a.vocab().relations().size(); ++i) {
    auto& out = rels[a.vocab().relations()[i].name];
    out = a.relations()[i].tuples();
    for (auto t : b.relations()[i].tuples()) {
      for (auto& x : t) x += shift;
      out.push_back(t);
    }
  }
  return Structure(a.vocab(), a.size() + b.size(), rels, {});
}

/// bin(A): relation blocks (declared relations other than <) in declaration order,
/// then big-endian constant blocks of ceil(log2 n) bits. Built-ins are left out.
inline std::string encode_binary(const Structure& a) {
  if (!a.vocab().is_ordered()) throw Error("binary encoding requires an ordered structure");
  std::string out;
  bool any = false;
  for (std::size_t i = 0; i < a.vocab().relations().size(); ++i) {
    const auto& sym = a.vocab().relations()[i];
    if (sym.builtin || sym.name == "<") continue;
    any = true;
    out += a.relations()[i].bit_string();
  }
  if (!any) out = std::string(a.size(), '0');
  const std::size_t width = ceil_log2(a.size());
  for (std::size_t i = 0; i < a.vocab().constants().size(); ++i) {
    if (a.vocab().constants()[i].builtin) continue;
    auto v = static_cast<std::size_t>(a.constant_values()[i]);
    for (std::size_t b = width; b-- > 0;) out += ((v >> b) & 1U) ? '1' : '0';
  }
  return out;
}

struct PartialIsoResult {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};

/// Checks that pairs together with all constant pairs form an injective,
/// well-defined map preserving and reflecting every relation on its domain.
inline PartialIsoResult is_partial_isomorphism(const Structure& a, const Structure& b,
                                               const std::vector<std::pair<Element, Element>>& pairs) {
  if (!(a.vocab() == b.vocab())) return {false, "vocabularies differ"};
  std::vector<std::pair<Element, Element>> all = pairs;
  for (std::size_t i = 0; i < a.vocab().constants().size(); ++i)
    all.push_back({a.constant_values()[i], b.constant_values()[i]});
  std::map<Element, Element> fwd, bwd;
  for (auto [x, y] : all) {
    if (x < 0 || static_cast<std::size_t>(x) >= a.size()) return {false, "element " + std::to_string(x) + " not in A"};
    if (y < 0 || static_cast<std::size_t>(y) >= b.size()) return {false, "element " + std::to_string(y) + " not in B"};
    auto f = fwd.find(x);
    if (f != fwd.end() && f->second != y) return {false, "not well defined at " + std::to_string(x)};
    auto g = bwd.find(y);
    if (g != bwd.end() && g->second != x) return {false, "not injective at " + std::to_string(y)};
    fwd[x] = y;
    bwd[y] = x;
  }
  std::vector<Element> dom;
  for (auto& [x, _] : fwd) dom.push_back(x);
  for (std::size_t ri = 0; ri < a.vocab().relations().size(); ++ri) {
    const auto& sym = a.vocab().relations()[ri];
    const std::size_t k = sym.arity;
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= dom.size();
    Tuple ta(k), tb(k);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t r = idx;
      for (std::size_t i = k; i-- > 0;) {
        ta[i] = dom[r % dom.size()];
        tb[i] = fwd[ta[i]];
        r /= dom.size();
      }
      if (a.relations()[ri].contains(ta) != b.relations()[ri].contains(tb)) {
        std::string s = sym.name + "(";
        for (std::size_t i = 0; i < k; ++i) s += (i ? "," : "") + std::to_string(ta[i]);
        return {false, s + ") is not preserved"};
      }
    }
  }
  return {};
}

/// Number of structures of size n over the declared symbols, as log2 of the relation
/// part plus the constant factor; exact when it fits 64 bits.
struct SpaceSize {
  std::size_t relation_bits = 0;  // product of 2^{n^a}
  std::size_t constant_count = 0; // number of declared constants; factor n^c
  std::size_t n = 0;
  std::optional<std::uint64_t> exact() const {
    if (relation_bits >= 63) return std::nullopt;
    long double v = std::ldexp(1.0L, static_cast<int>(relation_bits)) * std::pow(static_cast<long double>(n), constant_count);
    if (v > 9.0e18L) return std::nullopt;
    std::uint64_t r = std::uint64_t{1} << relation_bits;
    for (std::size_t i = 0; i < constant_count; ++i) r *= n;
    return r;
  }
  std::string describe() const {
    if (auto e = exact()) return std::to_string(*e);
    std::string s = "2^" + std::to_string(relation_bits);
    if (constant_count) s += " * " + std::to_string(n) + "^" + std::to_string(constant_count);
    return s;
  }
};

inline SpaceSize structure_space(const Vocabulary& vocab, std::size_t n) {
  SpaceSize s;
  s.n = n;
  for (const auto& r : vocab.user_relations()) s.relation_bits += checked_power(n, r.arity);
  s.constant_count = vocab.user_constants().size();
  return s;
}

/// Calls fn on every structure of size n over vocab (built-ins fixed), each exactly once.
inline void for_each_structure(const Vocabulary& vocab, std::size_t n, std::uint64_t limit,
                               const std::function<void(const Structure&)>& fn) {
  auto space = structure_space(vocab, n);
  auto exact = space.exact();
  if (!exact || *exact > limit)
    throw BoundExceeded("structure space " + space.describe() + " exceeds limit " + std::to_string(limit));
  auto rels = vocab.user_relations();
  const std::size_t nc = space.constant_count;
  for (std::uint64_t code = 0; code < *exact; ++code) {
    std::uint64_t c = code;
    std::vector<Element> consts(nc);
    for (std::size_t i = 0; i < nc; ++i) {
      consts[i] = static_cast<Element>(c % n);
      c /= n;
    }
    std::vector<Relation> rs;
    for (const auto& sym : rels) {
      Relation r(sym.arity, n);
      for (std::size_t b = 0; b < r.capacity(); ++b) {
        if (c & 1U) r.set_rank(b);
        c >>= 1;
      }
      rs.push_back(std::move(r));
    }
    fn(Structure::from_relations(vocab, n, std::move(rs), std::move(consts)));
  }
}

inline std::vector<Structure> enumerate_structures(const Vocabulary& vocab, std::size_t n, std::uint64_t limit) {
  std::vector<Structure> out;
  for_each_structure(vocab, n, limit, [&](const Structure& s) { out.push_back(s); });
  return out;
}

} // namespace fmw
