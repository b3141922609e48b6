#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fmw/error.hpp"

namespace fmw {

// Positions in this header are 1-indexed, unlike word_structure where position i is element i−1.

enum class Direction { First, Last }; // ▷ and ◁

struct BoundaryPosition {
  Direction dir = Direction::First;
  char letter = 0;
  friend bool operator==(const BoundaryPosition&, const BoundaryPosition&) = default;
};

using Ranker = std::vector<BoundaryPosition>;
using Position1 = std::optional<std::size_t>; // nullopt: undefined

inline void check_letter(char a, const std::string& alphabet) {
  if (!alphabet.empty() && alphabet.find(a) == std::string::npos)
    throw Error(std::string("letter '") + a + "' is not in the alphabet");
}

/// d_a(w), or d_a(w, q) when q is given.
inline Position1 boundary(const std::string& w, Direction d, char a, std::optional<std::size_t> q = std::nullopt,
                          const std::string& alphabet = "") {
  check_letter(a, alphabet);
  const std::size_t len = w.size();
  if (q && (*q < 1 || *q > len)) throw Error("reference position " + std::to_string(*q) + " outside [1," + std::to_string(len) + "]");
  if (d == Direction::First) {
    for (std::size_t i = q ? *q + 1 : 1; i <= len; ++i)
      if (w[i - 1] == a) return i;
  } else {
    for (std::size_t i = q ? *q - 1 : len; i >= 1; --i)
      if (w[i - 1] == a) return i;
  }
  return std::nullopt;
}

inline Position1 ranker_eval(const Ranker& r, const std::string& w, const std::string& alphabet = "") {
  if (r.empty()) throw Error("a ranker needs at least one boundary position");
  Position1 p;
  for (std::size_t i = 0; i < r.size(); ++i) {
    p = boundary(w, r[i].dir, r[i].letter, i == 0 ? std::nullopt : p, alphabet);
    if (!p) {
      for (std::size_t j = i + 1; j < r.size(); ++j) check_letter(r[j].letter, alphabet);
      return std::nullopt;
    }
  }
  return p;
}

/// ">a<b>1" style text.
inline Ranker parse_ranker(const std::string& text) {
  Ranker r;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == ' ') continue;
    if ((c != '>' && c != '<') || i + 1 >= text.size())
      throw ParseError("expected '>' or '<' followed by a letter", i);
    r.push_back({c == '>' ? Direction::First : Direction::Last, text[++i]});
  }
  if (r.empty()) throw ParseError("empty ranker", 0);
  return r;
}

inline std::string to_string(const Ranker& r) {
  std::string s;
  for (const auto& p : r) {
    s += p.dir == Direction::First ? '>' : '<';
    s += p.letter;
  }
  return s;
}

} // namespace fmw
