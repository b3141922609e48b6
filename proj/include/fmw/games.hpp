#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/evaluator.hpp"
#include "fmw/formula.hpp"
#include "fmw/structure.hpp"

namespace fmw {

constexpr Element kStar = -1; // off-board pebble

enum class Player { Spoiler, Duplicator };
enum class Side { A, B };

inline const char* to_string(Player p) { return p == Player::Spoiler ? "Spoiler" : "Duplicator"; }
inline const char* to_string(Side s) { return s == Side::A ? "A" : "B"; }

/// Pebble (or EF round) slots; kStar marks an unused slot.
struct Position {
  std::vector<Element> left, right;
  friend bool operator==(const Position&, const Position&) = default;
};

struct SpoilerMove {
  Side side = Side::A;
  std::size_t pebble = 0;
  Element element = 0;
  friend bool operator==(const SpoilerMove&, const SpoilerMove&) = default;
};

using Rounds = std::optional<std::size_t>; // nullopt: unbounded game

namespace detail {

/// Whether base ∪ {(a,b)} is a partial isomorphism, given that base already is one.
inline bool extends_partial_iso(const Structure& A, const Structure& B,
                                const std::vector<std::pair<Element, Element>>& base, Element a, Element b) {
  for (auto [x, y] : base) {
    if (x == a) return y == b;
    if (y == b) return false;
  }
  std::vector<Element> dom, img;
  for (auto [x, y] : base) {
    if (std::find(dom.begin(), dom.end(), x) != dom.end()) continue;
    dom.push_back(x);
    img.push_back(y);
  }
  dom.push_back(a);
  img.push_back(b);
  const std::size_t d = dom.size();
  for (std::size_t ri = 0; ri < A.relations().size(); ++ri) {
    const Relation& ra = A.relations()[ri];
    const Relation& rb = B.relations()[ri];
    const std::size_t k = ra.arity();
    std::vector<std::size_t> idx(k, 0);
    for (;;) {
      bool has_new = false;
      for (auto i : idx) has_new |= (i == d - 1);
      if (has_new) {
        std::size_t rka = 0, rkb = 0;
        for (auto i : idx) {
          rka = rka * A.size() + static_cast<std::size_t>(dom[i]);
          rkb = rkb * B.size() + static_cast<std::size_t>(img[i]);
        }
        if (ra.contains_rank(rka) != rb.contains_rank(rkb)) return false;
      }
      std::size_t p = k;
      while (p > 0) {
        if (++idx[p - 1] < d) break;
        idx[p - 1] = 0;
        --p;
      }
      if (p == 0) break;
    }
  }
  return true;
}

inline std::vector<std::pair<Element, Element>> constant_pairs(const Structure& A, const Structure& B) {
  std::vector<std::pair<Element, Element>> out;
  for (std::size_t i = 0; i < A.constant_values().size(); ++i)
    out.push_back({A.constant_values()[i], B.constant_values()[i]});
  return out;
}

/// Builds a partial map incrementally; false when some step breaks it.
inline bool pairs_partial_iso(const Structure& A, const Structure& B,
                              const std::vector<std::pair<Element, Element>>& pairs) {
  std::vector<std::pair<Element, Element>> acc;
  for (auto [a, b] : pairs) {
    if (!extends_partial_iso(A, B, acc, a, b)) return false;
    acc.push_back({a, b});
  }
  return true;
}

} // namespace detail

/// Common interface for EF and pebble game solvers. Positions hold one slot per
/// pebble (EF: one slot per initial element and per round).
class GameSolver {
public:
  GameSolver(Structure a, Structure b) : A_(std::move(a)), B_(std::move(b)) {
    if (!(A_.vocab() == B_.vocab())) throw Error("game structures must share a vocabulary");
    consts_ = detail::constant_pairs(A_, B_);
  }
  virtual ~GameSolver() = default;

  const Structure& left() const { return A_; }
  const Structure& right() const { return B_; }
  virtual std::size_t slots() const = 0;
  virtual bool is_ef() const = 0;

  /// Support equality plus partial isomorphism (constants included).
  bool position_ok(const Position& p) const {
    if (p.left.size() != slots() || p.right.size() != slots()) return false;
    std::vector<std::pair<Element, Element>> pairs = consts_;
    for (std::size_t i = 0; i < p.left.size(); ++i) {
      if ((p.left[i] == kStar) != (p.right[i] == kStar)) return false;
      if (p.left[i] == kStar) continue;
      if (p.left[i] < 0 || static_cast<std::size_t>(p.left[i]) >= A_.size()) return false;
      if (p.right[i] < 0 || static_cast<std::size_t>(p.right[i]) >= B_.size()) return false;
      pairs.push_back({p.left[i], p.right[i]});
    }
    return detail::pairs_partial_iso(A_, B_, pairs);
  }

  virtual bool duplicator_wins(const Position& p, Rounds r) = 0;

  /// Legal Spoiler moves in tie-break order: structure B before A, lowest pebble, lowest element.
  virtual std::vector<SpoilerMove> legal_spoiler_moves(const Position& p) const = 0;

  Position after(const Position& p, const SpoilerMove& m, Element reply) const {
    Position q = p;
    if (m.side == Side::A) {
      q.left[m.pebble] = m.element;
      q.right[m.pebble] = reply;
    } else {
      q.right[m.pebble] = m.element;
      q.left[m.pebble] = reply;
    }
    return q;
  }

  /// Position after the move is a valid s-partial isomorphism; checked incrementally.
  bool move_ok(const Position& p, const SpoilerMove& m, Element reply) const {
    std::vector<std::pair<Element, Element>> base = consts_;
    for (std::size_t i = 0; i < p.left.size(); ++i)
      if (i != m.pebble && p.left[i] != kStar) base.push_back({p.left[i], p.right[i]});
    Element a = m.side == Side::A ? m.element : reply;
    Element b = m.side == Side::A ? reply : m.element;
    return detail::extends_partial_iso(A_, B_, base, a, b);
  }

  std::size_t reply_range(const SpoilerMove& m) const { return m.side == Side::A ? B_.size() : A_.size(); }

  struct SpoilerAdvice {
    SpoilerMove move;
    bool winning = false;
  };
  struct DuplicatorAdvice {
    Element reply = 0;
    bool winning = false;
  };

  static Rounds next(Rounds r) { return r ? Rounds(*r - 1) : std::nullopt; }

  virtual SpoilerAdvice spoiler_advice(const Position& p, Rounds r) {
    auto moves = legal_spoiler_moves(p);
    if (moves.empty()) throw Error("no legal spoiler move");
    if (!r || *r > 0) {
      for (const auto& m : moves) {
        bool killing = true;
        for (std::size_t e = 0; e < reply_range(m) && killing; ++e) {
          auto el = static_cast<Element>(e);
          if (move_ok(p, m, el) && duplicator_wins(after(p, m, el), next(r))) killing = false;
        }
        if (killing) return {m, true};
      }
    }
    return {moves.front(), false};
  }

  virtual DuplicatorAdvice duplicator_advice(const Position& p, Rounds r, const SpoilerMove& m) {
    for (std::size_t e = 0; e < reply_range(m); ++e) {
      auto el = static_cast<Element>(e);
      if (move_ok(p, m, el) && duplicator_wins(after(p, m, el), next(r))) return {el, true};
    }
    return {0, false};
  }

protected:
  Structure A_, B_;
  std::vector<std::pair<Element, Element>> consts_;
};

// ---- Ehrenfeucht–Fraïssé games -----------------------------------------------------

class EFSolver : public GameSolver {
public:
  EFSolver(Structure a, Structure b, std::size_t initial, std::size_t m, std::size_t bound = 20'000'000)
      : GameSolver(std::move(a), std::move(b)), initial_(initial), m_(m), bound_(bound) {}

  std::size_t slots() const override { return initial_ + m_; }
  bool is_ef() const override { return true; }

  std::vector<SpoilerMove> legal_spoiler_moves(const Position& p) const override {
    std::size_t slot = p.left.size();
    for (std::size_t i = initial_; i < p.left.size(); ++i)
      if (p.left[i] == kStar) {
        slot = i;
        break;
      }
    std::vector<SpoilerMove> out;
    if (slot == p.left.size()) return out;
    for (Side side : {Side::B, Side::A}) {
      std::size_t size = side == Side::A ? A_.size() : B_.size();
      for (std::size_t e = 0; e < size; ++e) out.push_back({side, slot, static_cast<Element>(e)});
    }
    return out;
  }

  bool duplicator_wins(const Position& p, Rounds r) override {
    if (!r) throw Error("EF games have a finite number of rounds");
    if (!position_ok(p)) return false;
    std::vector<std::pair<Element, Element>> pairs;
    for (std::size_t i = 0; i < p.left.size(); ++i)
      if (p.left[i] != kStar) pairs.push_back({p.left[i], p.right[i]});
    std::size_t free_slots = 0;
    for (std::size_t i = initial_; i < p.left.size(); ++i) free_slots += p.left[i] == kStar;
    return wins(canon(pairs), std::min(*r, free_slots));
  }

  std::size_t memo_size() const { return memo_.size(); }

private:
  using Pairs = std::vector<std::pair<Element, Element>>;

  static Pairs canon(Pairs p) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
  }

  struct Key {
    Pairs pairs;
    std::size_t r;
    bool operator==(const Key& o) const { return r == o.r && pairs == o.pairs; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = k.r * 0x9e3779b97f4a7c15ULL;
      for (auto [a, b] : k.pairs) h = (h ^ static_cast<std::size_t>(a * 1000003 + b)) * 0x100000001b3ULL;
      return h;
    }
  };

  // pairs is already a partial isomorphism.
  bool wins(const Pairs& pairs, std::size_t r) {
    if (r == 0) return true;
    Key key{pairs, r};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= bound_) throw BoundExceeded("EF memo table exceeds bound " + std::to_string(bound_));
    Pairs base = consts_;
    base.insert(base.end(), pairs.begin(), pairs.end());
    bool result = true;
    for (int side = 0; side < 2 && result; ++side) {
      std::size_t ns = side == 0 ? A_.size() : B_.size();
      std::size_t nr = side == 0 ? B_.size() : A_.size();
      for (std::size_t e = 0; e < ns && result; ++e) {
        bool answered = false;
        for (std::size_t f = 0; f < nr && !answered; ++f) {
          Element a = static_cast<Element>(side == 0 ? e : f);
          Element b = static_cast<Element>(side == 0 ? f : e);
          if (!detail::extends_partial_iso(A_, B_, base, a, b)) continue;
          Pairs next = pairs;
          next.push_back({a, b});
          if (wins(canon(next), r - 1)) answered = true;
        }
        if (!answered) result = false;
      }
    }
    memo_.emplace(std::move(key), result);
    return result;
  }

  std::size_t initial_, m_, bound_;
  std::unordered_map<Key, bool, KeyHash> memo_;
};

struct GameResult {
  Player winner = Player::Duplicator;
  std::optional<SpoilerMove> spoiler_opening; // recommended first move when Spoiler wins
  std::shared_ptr<GameSolver> solver;
  Position start;
};

inline Position initial_position(const std::vector<Element>& a, const std::vector<Element>& b, std::size_t slots) {
  Position p;
  p.left.assign(slots, kStar);
  p.right.assign(slots, kStar);
  for (std::size_t i = 0; i < a.size(); ++i) p.left[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) p.right[i] = b[i];
  return p;
}

inline GameResult ef_game(const Structure& A, const std::vector<Element>& a, const Structure& B,
                          const std::vector<Element>& b, std::size_t m, std::size_t bound = 20'000'000) {
  if (a.size() != b.size()) throw Error("EF game needs tuples of equal length");
  auto solver = std::make_shared<EFSolver>(A, B, a.size(), m, bound);
  GameResult res;
  res.solver = solver;
  res.start = initial_position(a, b, a.size() + m);
  bool dup = solver->duplicator_wins(res.start, m);
  res.winner = dup ? Player::Duplicator : Player::Spoiler;
  if (!dup && solver->position_ok(res.start) && m > 0) res.spoiler_opening = solver->spoiler_advice(res.start, m).move;
  return res;
}

// ---- pebble games ---------------------------------------------------------------

/// Descending chain W_0 ⊇ W_1 ⊇ ... over all padded position pairs.
class WinSets {
public:
  WinSets(const Structure& A, const Structure& B, std::size_t s, std::optional<std::size_t> m,
          std::size_t bound = 16'000'000)
      : nA_(A.size()), nB_(B.size()), s_(s) {
    if (s == 0) throw Error("pebble games need at least one pebble");
    if (!(A.vocab() == B.vocab())) throw Error("game structures must share a vocabulary");
    long double space = std::pow(static_cast<long double>(nA_ + 1), s) * std::pow(static_cast<long double>(nB_ + 1), s);
    if (space > static_cast<long double>(bound))
      throw BoundExceeded("pebble position space " + std::to_string(static_cast<unsigned long long>(space)) +
                          " exceeds bound " + std::to_string(bound));
    cA_ = checked_power(nA_ + 1, s);
    cB_ = checked_power(nB_ + 1, s);
    powA_.assign(s, 1);
    powB_.assign(s, 1);
    for (std::size_t i = 1; i < s; ++i) {
      powA_[i] = powA_[i - 1] * (nA_ + 1);
      powB_[i] = powB_[i - 1] * (nB_ + 1);
    }
    auto consts = detail::constant_pairs(A, B);
    std::vector<char> w0(cA_ * cB_, 0);
    for (std::size_t ia = 0; ia < cA_; ++ia) {
      for (std::size_t ib = 0; ib < cB_; ++ib) {
        bool ok = true;
        std::vector<std::pair<Element, Element>> pairs = consts;
        for (std::size_t i = 0; i < s && ok; ++i) {
          std::size_t da = digitA(ia, i), db = digitB(ib, i);
          if ((da == nA_) != (db == nB_)) ok = false;
          else if (da != nA_) pairs.push_back({static_cast<Element>(da), static_cast<Element>(db)});
        }
        if (ok) ok = detail::pairs_partial_iso(A, B, pairs);
        w0[ia * cB_ + ib] = ok ? 1 : 0;
      }
    }
    levels_.push_back(std::move(w0));
    while (!m || levels_.size() <= *m) {
      auto next = refine(levels_.back());
      bool same = next == levels_.back();
      if (same) {
        stabilized_at_ = levels_.size() - 1;
        if (!m) break;
      }
      levels_.push_back(std::move(next));
      if (same && m) {
        // keep materializing identical levels only up to m
        while (levels_.size() <= *m) levels_.push_back(levels_.back());
        break;
      }
    }
  }

  std::size_t pebbles() const { return s_; }
  std::size_t level_count() const { return levels_.size(); }
  std::optional<std::size_t> stabilized_at() const { return stabilized_at_; }

  std::size_t index(const Position& p) const {
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < s_; ++i) {
      ia += powA_[i] * (p.left[i] == kStar ? nA_ : static_cast<std::size_t>(p.left[i]));
      ib += powB_[i] * (p.right[i] == kStar ? nB_ : static_cast<std::size_t>(p.right[i]));
    }
    return ia * cB_ + ib;
  }

  Position position(std::size_t idx) const {
    Position p;
    std::size_t ia = idx / cB_, ib = idx % cB_;
    for (std::size_t i = 0; i < s_; ++i) {
      std::size_t da = digitA(ia, i), db = digitB(ib, i);
      p.left.push_back(da == nA_ ? kStar : static_cast<Element>(da));
      p.right.push_back(db == nB_ ? kStar : static_cast<Element>(db));
    }
    return p;
  }

  /// Membership in W_j; levels beyond the last computed one equal the stable level.
  bool contains(std::size_t j, const Position& p) const {
    if (j >= levels_.size()) {
      if (!stabilized_at_) throw Error("level " + std::to_string(j) + " was not computed");
      j = levels_.size() - 1;
    }
    return levels_[j][index(p)] != 0;
  }
  bool contains_infinity(const Position& p) const {
    if (!stabilized_at_) throw Error("win sets were not computed to stabilization");
    return levels_[*stabilized_at_][index(p)] != 0;
  }

  /// Largest j with p in W_j, or nullopt when p is in every level.
  std::optional<std::size_t> rank(const Position& p) const {
    std::size_t idx = index(p);
    if (!levels_[0][idx]) return std::nullopt; // callers treat non-isos separately
    for (std::size_t j = 1; j < levels_.size(); ++j)
      if (!levels_[j][idx]) return j - 1;
    return std::nullopt;
  }

  std::vector<Position> members(std::size_t j) const {
    std::vector<Position> out;
    const auto& lv = levels_[std::min(j, levels_.size() - 1)];
    for (std::size_t i = 0; i < lv.size(); ++i)
      if (lv[i]) out.push_back(position(i));
    return out;
  }

  std::size_t level_size(std::size_t j) const {
    const auto& lv = levels_[std::min(j, levels_.size() - 1)];
    return static_cast<std::size_t>(std::count(lv.begin(), lv.end(), 1));
  }

private:
  std::size_t digitA(std::size_t code, std::size_t i) const { return (code / powA_[i]) % (nA_ + 1); }
  std::size_t digitB(std::size_t code, std::size_t i) const { return (code / powB_[i]) % (nB_ + 1); }

  std::vector<char> refine(const std::vector<char>& w) const {
    std::vector<char> out(w.size(), 0);
    for (std::size_t idx = 0; idx < w.size(); ++idx) {
      if (!w[idx]) continue;
      std::size_t ia = idx / cB_, ib = idx % cB_;
      bool ok = true;
      for (std::size_t i = 0; i < s_ && ok; ++i) {
        std::size_t da = digitA(ia, i), db = digitB(ib, i);
        std::size_t baseA = ia - da * powA_[i], baseB = ib - db * powB_[i];
        for (std::size_t a = 0; a < nA_ && ok; ++a) {
          bool found = false;
          for (std::size_t b = 0; b < nB_ && !found; ++b)
            found = w[(baseA + a * powA_[i]) * cB_ + baseB + b * powB_[i]] != 0;
          ok = found;
        }
        for (std::size_t b = 0; b < nB_ && ok; ++b) {
          bool found = false;
          for (std::size_t a = 0; a < nA_ && !found; ++a)
            found = w[(baseA + a * powA_[i]) * cB_ + baseB + b * powB_[i]] != 0;
          ok = found;
        }
      }
      out[idx] = ok ? 1 : 0;
    }
    return out;
  }

  std::size_t nA_, nB_, s_, cA_ = 0, cB_ = 0;
  std::vector<std::size_t> powA_, powB_;
  std::vector<std::vector<char>> levels_;
  std::optional<std::size_t> stabilized_at_;
};

inline WinSets pebble_win_sets(const Structure& A, const Structure& B, std::size_t s, std::optional<std::size_t> m,
                               std::size_t bound = 16'000'000) {
  return WinSets(A, B, s, m, bound);
}

/// Pebble game solver: uses the win sets when the position space is small enough,
/// otherwise a memoized game-tree search over canonical positions (pebbles are
/// interchangeable, so positions are keyed by their sorted pebble pairs).
class PebbleSolver : public GameSolver {
public:
  PebbleSolver(Structure a, Structure b, std::size_t s, std::size_t win_bound = 4'000'000,
               std::size_t memo_bound = 20'000'000)
      : GameSolver(std::move(a), std::move(b)), s_(s), memo_bound_(memo_bound) {
    if (s == 0) throw Error("pebble games need at least one pebble");
    long double space = std::pow(static_cast<long double>(A_.size() + 1), s) *
                        std::pow(static_cast<long double>(B_.size() + 1), s);
    if (space <= static_cast<long double>(win_bound)) win_ = std::make_shared<WinSets>(A_, B_, s, std::nullopt, win_bound);
  }

  std::size_t slots() const override { return s_; }
  bool is_ef() const override { return false; }
  const WinSets* win_sets() const { return win_.get(); }

  std::vector<SpoilerMove> legal_spoiler_moves(const Position&) const override {
    std::vector<SpoilerMove> out;
    for (Side side : {Side::B, Side::A}) {
      std::size_t size = side == Side::A ? A_.size() : B_.size();
      for (std::size_t i = 0; i < s_; ++i)
        for (std::size_t e = 0; e < size; ++e) out.push_back({side, i, static_cast<Element>(e)});
    }
    return out;
  }

  bool duplicator_wins(const Position& p, Rounds r) override {
    if (win_) {
      if (!win_->contains(0, p)) return false;
      return r ? win_->contains(*r, p) : win_->contains_infinity(p);
    }
    if (!r) throw BoundExceeded("unbounded pebble game on a position space beyond the configured bound");
    if (!position_ok(p)) return false;
    std::vector<std::pair<Element, Element>> pairs;
    for (std::size_t i = 0; i < s_; ++i) pairs.push_back({p.left[i], p.right[i]});
    return wins(canon(pairs), *r);
  }

  SpoilerAdvice spoiler_advice(const Position& p, Rounds r) override {
    if (!r && win_ && win_->contains(0, p) && !win_->contains_infinity(p)) {
      // Spoiler wins the unbounded game within rank+1 moves.
      return GameSolver::spoiler_advice(p, *win_->rank(p) + 1);
    }
    return GameSolver::spoiler_advice(p, r);
  }

private:
  using Pairs = std::vector<std::pair<Element, Element>>;

  static Pairs canon(Pairs p) {
    std::sort(p.begin(), p.end(), [](const auto& x, const auto& y) {
      bool xs = x.first == kStar, ys = y.first == kStar;
      if (xs != ys) return ys;
      return x < y;
    });
    return p;
  }

  struct Key {
    Pairs pairs;
    std::size_t r;
    bool operator==(const Key& o) const { return r == o.r && pairs == o.pairs; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = k.r * 0x9e3779b97f4a7c15ULL;
      for (auto [a, b] : k.pairs) h = (h ^ static_cast<std::size_t>((a + 1) * 1000003 + (b + 1))) * 0x100000001b3ULL;
      return h;
    }
  };

  bool wins(const Pairs& pairs, std::size_t r) {
    if (r == 0) return true;
    Key key{pairs, r};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= memo_bound_) throw BoundExceeded("pebble memo table exceeds bound " + std::to_string(memo_bound_));
    bool result = true;
    for (std::size_t i = 0; i < s_ && result; ++i) {
      if (i > 0 && pairs[i] == pairs[i - 1]) continue; // identical pebbles, same options
      Pairs base = consts_;
      for (std::size_t j = 0; j < s_; ++j)
        if (j != i && pairs[j].first != kStar) base.push_back(pairs[j]);
      for (int side = 0; side < 2 && result; ++side) {
        std::size_t ns = side == 0 ? A_.size() : B_.size();
        std::size_t nr = side == 0 ? B_.size() : A_.size();
        for (std::size_t e = 0; e < ns && result; ++e) {
          bool answered = false;
          for (std::size_t f = 0; f < nr && !answered; ++f) {
            Element a = static_cast<Element>(side == 0 ? e : f);
            Element b = static_cast<Element>(side == 0 ? f : e);
            if (!detail::extends_partial_iso(A_, B_, base, a, b)) continue;
            Pairs next = pairs;
            next[i] = {a, b};
            if (wins(canon(next), r - 1)) answered = true;
          }
          if (!answered) result = false;
        }
      }
    }
    memo_.emplace(std::move(key), result);
    return result;
  }

  std::size_t s_;
  std::size_t memo_bound_;
  std::shared_ptr<WinSets> win_;
  std::unordered_map<Key, bool, KeyHash> memo_;
};

inline GameResult pebble_game(const Structure& A, const std::vector<Element>& a, const Structure& B,
                              const std::vector<Element>& b, std::size_t s, Rounds m,
                              std::size_t win_bound = 4'000'000) {
  if (a.size() > s || b.size() > s) throw Error("initial tuples are longer than the number of pebbles");
  auto solver = std::make_shared<PebbleSolver>(A, B, s, win_bound);
  GameResult res;
  res.solver = solver;
  res.start = initial_position(a, b, s);
  for (std::size_t i = 0; i < s; ++i)
    if ((res.start.left[i] == kStar) != (res.start.right[i] == kStar))
      throw Error("initial tuples must have equal support");
  bool dup = solver->duplicator_wins(res.start, m);
  res.winner = dup ? Player::Duplicator : Player::Spoiler;
  if (!dup && solver->position_ok(res.start) && (!m || *m > 0))
    res.spoiler_opening = solver->spoiler_advice(res.start, m).move;
  return res;
}

inline std::size_t s_rank(const Structure& A, std::size_t s, std::size_t bound = 16'000'000) {
  WinSets w(A, A, s, std::nullopt, bound);
  return *w.stabilized_at();
}

/// Position after the losing side's best effort, tagged with whether it preserves a win.
struct HintMove {
  std::optional<SpoilerMove> spoiler;
  std::optional<Element> reply;
  bool winning = false;
};

/// Strategy extraction: Spoiler move when no move is pending, Duplicator reply otherwise.
inline HintMove optimal_move(GameSolver& solver, const Position& p, Rounds r,
                             const std::optional<SpoilerMove>& pending = std::nullopt) {
  HintMove h;
  if (pending) {
    auto adv = solver.duplicator_advice(p, r, *pending);
    h.reply = adv.reply;
    h.winning = adv.winning;
  } else {
    auto adv = solver.spoiler_advice(p, r);
    h.spoiler = adv.move;
    h.winning = adv.winning;
  }
  return h;
}

// ---- iso-type formulas, Scott formulas, φ_{s,∞} ---------------------------------------

inline SymId pebble_var(std::size_t i) { return intern("v" + std::to_string(i + 1)); }

namespace detail {

/// Atomic formulas over the given terms (equalities between distinct terms and every
/// relation applied to every term tuple).
inline std::vector<Formula> atoms_over(const Vocabulary& vocab, const Terms& terms) {
  std::vector<Formula> out;
  for (std::size_t i = 0; i < terms.size(); ++i)
    for (std::size_t j = i + 1; j < terms.size(); ++j) out.push_back(eq(terms[i], terms[j]));
  for (const auto& r : vocab.relations()) {
    std::size_t total = checked_power(terms.size(), r.arity);
    for (std::size_t idx = 0; idx < total; ++idx) {
      Terms args(r.arity);
      std::size_t x = idx;
      for (std::size_t k = r.arity; k-- > 0;) {
        args[k] = terms[x % terms.size()];
        x /= terms.size();
      }
      out.push_back(rel(r.name, args));
    }
  }
  return out;
}

inline Terms pebble_terms(const Vocabulary& vocab, const std::vector<Element>& a) {
  Terms ts;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != kStar) ts.push_back(Term::var(pebble_var(i)));
  for (const auto& c : vocab.constants()) ts.push_back(Term::constant(c.name));
  return ts;
}

} // namespace detail

/// Builder for s-m-isomorphism types, caching ψ^j_ā by (j, ā) so results share structure.
class IsoTypeBuilder {
public:
  IsoTypeBuilder(const Structure& A, std::size_t s, std::size_t node_budget = 5'000'000)
      : A_(A), s_(s), budget_(node_budget) {}

  Formula psi(const std::vector<Element>& a, std::size_t m) {
    if (a.size() != s_) throw Error("iso type needs a tuple of length s");
    auto key = std::make_pair(m, a);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    Formula out;
    if (m == 0) {
      Terms ts = detail::pebble_terms(A_.vocab(), a);
      Assignment alpha;
      for (std::size_t i = 0; i < s_; ++i)
        if (a[i] != kStar) alpha.vars[pebble_var(i)] = a[i];
      std::vector<Formula> lits;
      for (auto& at : detail::atoms_over(A_.vocab(), ts)) lits.push_back(satisfies(A_, at, alpha) ? at : neg(at));
      out = big_and(lits);
    } else {
      std::vector<Formula> parts{psi(a, 0)};
      for (std::size_t i = 0; i < s_; ++i) {
        std::vector<Formula> ex, alts;
        for (std::size_t e = 0; e < A_.size(); ++e) {
          auto b = a;
          b[i] = static_cast<Element>(e);
          Formula sub = psi(b, m - 1);
          ex.push_back(exists(pebble_var(i), sub));
          alts.push_back(sub);
        }
        parts.push_back(big_and(ex));
        parts.push_back(forall(pebble_var(i), big_or(alts)));
      }
      out = big_and(parts);
    }
    nodes_ += 1;
    if (nodes_ > budget_) throw BoundExceeded("iso-type formula budget exceeded");
    cache_.emplace(key, out);
    return out;
  }

private:
  const Structure& A_;
  std::size_t s_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  std::map<std::pair<std::size_t, std::vector<Element>>, Formula> cache_;
};

inline Formula iso_type_formula(const Structure& A, const std::vector<Element>& a, std::size_t s, std::size_t m) {
  IsoTypeBuilder b(A, s);
  return b.psi(a, m);
}

/// All tuples over A ∪ {*} of length s.
inline std::vector<std::vector<Element>> padded_tuples(std::size_t n, std::size_t s) {
  std::vector<std::vector<Element>> out;
  std::size_t total = checked_power(n + 1, s);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<Element> t(s);
    std::size_t x = idx;
    for (std::size_t i = 0; i < s; ++i) {
      std::size_t d = x % (n + 1);
      x /= n + 1;
      t[i] = d == n ? kStar : static_cast<Element>(d);
    }
    out.push_back(t);
  }
  return out;
}

inline Formula scott_formula(const Structure& A, const std::vector<Element>& a, std::size_t s) {
  std::size_t r = s_rank(A, s);
  IsoTypeBuilder b(A, s);
  std::vector<Formula> parts{b.psi(a, r)};
  std::vector<SymId> vs;
  for (std::size_t i = 0; i < s; ++i) vs.push_back(pebble_var(i));
  for (const auto& t : padded_tuples(A.size(), s)) parts.push_back(forall(vs, implies(b.psi(t, r), b.psi(t, r + 1))));
  return big_and(parts);
}

inline Assignment pebble_assignment(const std::vector<Element>& a) {
  Assignment alpha;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != kStar) alpha.vars[pebble_var(i)] = a[i];
  return alpha;
}

/// The Z-positive formula whose least fixed point on (A,A) is the set of pairs of
/// s-tuples from which Spoiler wins the unbounded s-pebble game.
inline Formula phi_s_infinity(const Vocabulary& vocab, std::size_t s, const std::string& z = "Z") {
  std::vector<SymId> xs, ys;
  for (std::size_t i = 0; i < s; ++i) {
    xs.push_back(intern("x" + std::to_string(i + 1)));
    ys.push_back(intern("y" + std::to_string(i + 1)));
  }
  Terms tv;
  for (std::size_t i = 0; i < s; ++i) tv.push_back(Term::var(pebble_var(i)));
  for (const auto& c : vocab.constants()) tv.push_back(Term::constant(c.name));
  Substitution to_x, to_y;
  for (std::size_t i = 0; i < s; ++i) {
    to_x[pebble_var(i)] = Term::var(xs[i]);
    to_y[pebble_var(i)] = Term::var(ys[i]);
  }
  std::vector<Formula> ds;
  for (const auto& at : detail::atoms_over(vocab, tv)) ds.push_back(iff(substitute(at, to_x), neg(substitute(at, to_y))));
  Terms zargs = var_terms(xs);
  for (auto y : ys) zargs.push_back(Term::var(y));
  Formula zat = rel(z, zargs);
  for (std::size_t i = 0; i < s; ++i) {
    ds.push_back(exists(xs[i], forall(ys[i], zat)));
    ds.push_back(exists(ys[i], forall(xs[i], zat)));
  }
  return big_or(ds);
}

inline std::vector<SymId> phi_s_infinity_vars(std::size_t s) {
  std::vector<SymId> out;
  for (std::size_t i = 0; i < s; ++i) out.push_back(intern("x" + std::to_string(i + 1)));
  for (std::size_t i = 0; i < s; ++i) out.push_back(intern("y" + std::to_string(i + 1)));
  return out;
}

// ---- rank survey ---------------------------------------------------------------

struct SurveyRow {
  std::size_t n = 0;
  std::size_t max_rank = 0;
  std::size_t structures = 0;
};

/// Presets: "orders", "orders-minmax", "paths" (directed successor paths), "cycles"
/// (cycle on n vertices), "all-graphs" (every digraph of size n), "all-unary".
inline std::vector<Structure> preset_class(const std::string& preset, std::size_t n, std::uint64_t limit = 1 << 16) {
  if (preset == "orders") return {linear_order(n)};
  if (preset == "orders-minmax") return {linear_order(n, true)};
  if (preset == "paths") return {path_graph(n)};
  if (preset == "cycles") {
    if (n < 2) throw Error("cycles need at least 2 vertices");
    return {cycle_graph(n - 1)};
  }
  if (preset == "all-graphs") return enumerate_structures(Vocabulary({{"E", 2}}, {}), n, limit);
  if (preset == "all-unary") return enumerate_structures(Vocabulary({{"P", 1}}, {}), n, limit);
  throw Error("unknown preset class '" + preset + "'");
}

inline std::vector<SurveyRow> survey_ranks(const std::string& preset, std::size_t s, const std::vector<std::size_t>& sizes,
                                           std::uint64_t limit = 1 << 16) {
  std::vector<SurveyRow> rows;
  for (auto n : sizes) {
    SurveyRow row;
    row.n = n;
    for (const auto& A : preset_class(preset, n, limit)) {
      row.max_rank = std::max(row.max_rank, s_rank(A, s));
      ++row.structures;
    }
    rows.push_back(row);
  }
  return rows;
}

} // namespace fmw
