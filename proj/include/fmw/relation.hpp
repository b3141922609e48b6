#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fmw/error.hpp"

namespace fmw {

using Element = int;
using Tuple = std::vector<Element>;

/// n^k with overflow guard; throws when the result does not fit a size_t-sized table.
inline std::size_t checked_power(std::size_t n, std::size_t k, std::size_t cap = std::size_t{1} << 40) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (n != 0 && r > cap / n) throw BoundExceeded("table of size " + std::to_string(n) + "^" + std::to_string(k) + " is too large");
    r *= n;
  }
  return r;
}

/// Row-major rank i1*n^(k-1) + ... + ik.
inline std::size_t tuple_rank(std::span<const Element> t, std::size_t n) {
  std::size_t r = 0;
  for (Element e : t) r = r * n + static_cast<std::size_t>(e);
  return r;
}

inline Tuple tuple_unrank(std::size_t rank, std::size_t arity, std::size_t n) {
  Tuple t(arity);
  for (std::size_t i = arity; i-- > 0;) {
    t[i] = static_cast<Element>(rank % n);
    rank /= n;
  }
  return t;
}

/// A k-ary relation over {0..n-1}, stored densely by tuple rank.
class Relation {
public:
  Relation() = default;
  Relation(std::size_t arity, std::size_t n)
      : arity_(arity), n_(n), bits_(checked_power(n, arity)), words_((bits_ + 63) / 64, 0) {}

  static Relation full(std::size_t arity, std::size_t n) {
    Relation r(arity, n);
    for (std::size_t i = 0; i < r.bits_; ++i) r.set_rank(i);
    return r;
  }

  static Relation from_tuples(std::size_t arity, std::size_t n, const std::vector<Tuple>& tuples) {
    Relation r(arity, n);
    for (const auto& t : tuples) r.insert(t);
    return r;
  }

  std::size_t arity() const { return arity_; }
  std::size_t universe_size() const { return n_; }
  std::size_t capacity() const { return bits_; }

  bool contains_rank(std::size_t rank) const { return (words_[rank >> 6] >> (rank & 63)) & 1U; }
  void set_rank(std::size_t rank) { words_[rank >> 6] |= (std::uint64_t{1} << (rank & 63)); }
  void clear_rank(std::size_t rank) { words_[rank >> 6] &= ~(std::uint64_t{1} << (rank & 63)); }

  bool contains(std::span<const Element> t) const {
    if (t.size() != arity_) return false;
    for (Element e : t)
      if (e < 0 || static_cast<std::size_t>(e) >= n_) return false;
    return contains_rank(tuple_rank(t, n_));
  }

  void insert(std::span<const Element> t) {
    if (t.size() != arity_)
      throw Error("tuple of length " + std::to_string(t.size()) + " for relation of arity " + std::to_string(arity_));
    for (Element e : t)
      if (e < 0 || static_cast<std::size_t>(e) >= n_)
        throw Error("tuple entry " + std::to_string(e) + " out of range for universe of size " + std::to_string(n_));
    set_rank(tuple_rank(t, n_));
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }

  std::vector<Tuple> tuples() const {
    std::vector<Tuple> out;
    for (std::size_t i = 0; i < bits_; ++i)
      if (contains_rank(i)) out.push_back(tuple_unrank(i, arity_, n_));
    return out;
  }

  bool subset_of(const Relation& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  Relation complement() const {
    Relation r = *this;
    for (auto& w : r.words_) w = ~w;
    r.trim();
    return r;
  }

  Relation& operator|=(const Relation& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }

  Relation& operator&=(const Relation& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }

  /// Bit string in rank order, '1' for members.
  std::string bit_string() const {
    std::string s(bits_, '0');
    for (std::size_t i = 0; i < bits_; ++i)
      if (contains_rank(i)) s[i] = '1';
    return s;
  }

  static Relation from_bit_string(std::size_t arity, std::size_t n, const std::string& bits) {
    Relation r(arity, n);
    if (bits.size() != r.bits_) throw Error("bit string length does not match n^k");
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i] == '1') r.set_rank(i);
    return r;
  }

  std::size_t hash() const {
    std::size_t h = std::hash<std::size_t>{}(arity_ * 1315423911U + n_);
    for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }

  friend bool operator==(const Relation& a, const Relation& b) {
    return a.arity_ == b.arity_ && a.n_ == b.n_ && a.words_ == b.words_;
  }

private:
  void trim() {
    std::size_t extra = words_.size() * 64 - bits_;
    if (extra > 0 && !words_.empty()) words_.back() &= (~std::uint64_t{0}) >> extra;
  }

  std::size_t arity_ = 0;
  std::size_t n_ = 0;
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

struct RelationHash {
  std::size_t operator()(const Relation& r) const { return r.hash(); }
};

/// Human-readable tuple list, e.g. {(0,1),(1,2)}; unary relations print as {0,1}.
inline std::string to_string(const Relation& r) {
  std::string s = "{";
  bool first = true;
  for (const auto& t : r.tuples()) {
    if (!first) s += ",";
    first = false;
    if (t.size() == 1) {
      s += std::to_string(t[0]);
      continue;
    }
    s += "(";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
    s += ")";
  }
  return s + "}";
}

} // namespace fmw
