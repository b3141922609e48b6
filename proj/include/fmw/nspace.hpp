#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/formula.hpp"
#include "fmw/structure.hpp"

namespace fmw {

enum class HeadMove { Left, Right, Stay };

struct Transition {
  std::size_t state = 0;
  int input_bit = 0;
  int work_bit = 0;
  std::size_t next_state = 0;
  HeadMove input_move = HeadMove::Right;
  int write_bit = 0;
  HeadMove work_move = HeadMove::Right;
};

/// Nondeterministic machine with a read-only input tape holding bin(A) and a binary
/// work tape of m·f(n) bits (rounded up to whole words). Start state 0.
struct NTMSpec {
  std::size_t states = 1;
  std::size_t accept = 0;
  std::size_t m = 1;
  std::string f = "logn"; // "logn", "n" or "1"
  std::vector<Transition> table;

  void validate() const {
    if (states == 0) throw Error("machine needs at least one state");
    if (accept >= states) throw Error("accept state out of range");
    if (m == 0) throw Error("space coefficient m must be positive");
    if (f != "logn" && f != "n" && f != "1") throw Error("unknown space bound '" + f + "'");
    for (const auto& t : table) {
      if (t.state >= states || t.next_state >= states) throw Error("transition refers to a state out of range");
      if ((t.input_bit | t.work_bit | t.write_bit) & ~1) throw Error("tape symbols must be 0 or 1");
    }
  }

  bool deterministic() const {
    std::set<std::tuple<std::size_t, int, int>> seen;
    for (const auto& t : table)
      if (!seen.insert({t.state, t.input_bit, t.work_bit}).second) return false;
    return true;
  }

  std::size_t bound(std::size_t n) const {
    if (f == "logn") return std::max<std::size_t>(1, ceil_log2(n));
    if (f == "n") return n;
    return 1;
  }
};

/// Parameters and tuple layout (q, w₁..w_h, s, r₁..r_a, p, v₁..v_t, v) at size n.
struct ConfigLayout {
  struct Block {
    bool relation = true;
    bool dummy = false;
    std::size_t arity = 1;
    std::string name;
    std::size_t offset = 0; // first bit in bin(A)
    std::size_t length = 0;
  };

  std::size_t n = 0;
  std::size_t a = 1;        // widest relation block
  std::size_t word_bits = 1; // ⌊log n⌋ usable bits per work variable
  std::size_t const_bits = 1; // ⌈log n⌉ bits per constant block
  std::size_t h = 1, t = 0, g = 0;
  std::size_t m = 1, f = 1;
  std::vector<Block> blocks;
  std::size_t input_length = 0;

  std::size_t q_at() const { return 0; }
  std::size_t w_at(std::size_t i) const { return 1 + i; }
  std::size_t s_at() const { return 1 + h; }
  std::size_t r_at(std::size_t i) const { return 2 + h + i; }
  std::size_t p_at() const { return 2 + h + a; }
  std::size_t vbar_at(std::size_t j) const { return 3 + h + a + j; }
  std::size_t v_at() const { return 3 + h + a + t; }
  std::size_t cells() const { return h * word_bits; }
};

inline ConfigLayout make_layout(const NTMSpec& M, const Vocabulary& vocab, std::size_t n) {
  M.validate();
  if (n < 2) throw Error("configuration encoding needs at least two elements");
  ConfigLayout L;
  L.n = n;
  L.m = M.m;
  L.f = M.bound(n);
  L.word_bits = floor_log2(n);
  L.const_bits = ceil_log2(n);
  L.h = M.m * ((L.f + L.word_bits - 1) / L.word_bits);
  std::size_t pw = 1;
  while (pw < L.h) {
    pw *= n;
    ++L.t;
  }
  std::size_t off = 0;
  for (const auto& r : vocab.user_relations()) {
    if (r.name == "<") continue;
    std::size_t len = checked_power(n, r.arity);
    L.blocks.push_back({true, false, r.arity, r.name, off, len});
    off += len;
  }
  if (L.blocks.empty()) {
    L.blocks.push_back({true, true, 1, "", 0, n});
    off = n;
  }
  for (const auto& c : vocab.user_constants()) {
    L.blocks.push_back({false, false, 0, c, off, L.const_bits});
    off += L.const_bits;
  }
  L.input_length = off;
  L.a = 1;
  for (const auto& b : L.blocks) L.a = std::max(L.a, b.arity);
  L.g = 4 + L.a + L.h + L.t;
  if (L.blocks.size() > n) throw Error("too many input blocks to address with one element");
  return L;
}

struct MachineConfig {
  std::size_t state = 0;
  std::size_t input_pos = 0;
  std::size_t work_pos = 0;
  std::vector<char> tape;
  friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

struct MachineConfigHash {
  std::size_t operator()(const MachineConfig& c) const {
    std::size_t h = c.state * 1315423911u ^ (c.input_pos << 20) ^ (c.work_pos << 40);
    for (char b : c.tape) h = h * 31 + static_cast<std::size_t>(b);
    return h;
  }
};

namespace detail {

inline std::optional<std::size_t> moved(std::size_t pos, HeadMove d, std::size_t len) {
  if (d == HeadMove::Stay) return pos;
  if (d == HeadMove::Left) return pos == 0 ? std::nullopt : std::optional<std::size_t>(pos - 1);
  return pos + 1 >= len ? std::nullopt : std::optional<std::size_t>(pos + 1);
}

/// Successors of c; a head leaving its tape halts that branch (reject).
inline std::vector<MachineConfig> step(const NTMSpec& M, const std::string& input, const MachineConfig& c) {
  std::vector<MachineConfig> out;
  int ib = input[c.input_pos] == '1';
  int wb = c.tape[c.work_pos];
  for (const auto& tr : M.table) {
    if (tr.state != c.state || tr.input_bit != ib || tr.work_bit != wb) continue;
    auto ip = moved(c.input_pos, tr.input_move, input.size());
    auto wp = moved(c.work_pos, tr.work_move, c.tape.size());
    if (!ip || !wp) continue;
    MachineConfig d = c;
    d.state = tr.next_state;
    d.tape[c.work_pos] = static_cast<char>(tr.write_bit);
    d.input_pos = *ip;
    d.work_pos = *wp;
    out.push_back(std::move(d));
  }
  return out;
}

} // namespace detail

struct RunResult {
  bool accepted = false;
  std::size_t explored = 0;
};

/// Exhaustive search of the machine's configurations on bin(A).
inline RunResult run_ntm(const NTMSpec& M, const Structure& A, std::size_t limit = 5'000'000) {
  ConfigLayout L = make_layout(M, A.vocab(), A.size());
  std::string input = encode_binary(A);
  if (input.size() != L.input_length) throw Error("input layout does not match the binary encoding");
  MachineConfig start{0, 0, 0, std::vector<char>(L.cells(), 0)};
  std::unordered_set<MachineConfig, MachineConfigHash> seen{start};
  std::deque<MachineConfig> queue{start};
  RunResult res;
  while (!queue.empty()) {
    MachineConfig c = std::move(queue.front());
    queue.pop_front();
    ++res.explored;
    if (c.state == M.accept) {
      res.accepted = true;
      return res;
    }
    for (auto& d : detail::step(M, input, c)) {
      if (seen.size() >= limit) throw BoundExceeded("configuration space exceeds limit " + std::to_string(limit));
      if (seen.insert(d).second) queue.push_back(std::move(d));
    }
  }
  return res;
}

// ---- configuration tuples ------------------------------------------------------------

inline std::optional<MachineConfig> decode_config(const ConfigLayout& L, std::size_t states, const Tuple& c) {
  const Element max = static_cast<Element>(L.n - 1);
  if (static_cast<std::size_t>(c[L.q_at()]) >= states) return std::nullopt;
  MachineConfig mc;
  mc.state = static_cast<std::size_t>(c[L.q_at()]);
  mc.tape.assign(L.cells(), 0);
  for (std::size_t i = 0; i < L.h; ++i) {
    auto w = static_cast<std::size_t>(c[L.w_at(i)]);
    if (w >> L.word_bits) return std::nullopt;
    for (std::size_t b = 0; b < L.word_bits; ++b) mc.tape[i * L.word_bits + b] = static_cast<char>((w >> b) & 1);
  }
  auto s = static_cast<std::size_t>(c[L.s_at()]);
  if (s >= L.blocks.size()) return std::nullopt;
  const auto& blk = L.blocks[s];
  Element p = c[L.p_at()];
  if (blk.relation) {
    for (std::size_t i = blk.arity; i < L.a; ++i)
      if (c[L.r_at(i)] != 0) return std::nullopt;
    if (p != 0) return std::nullopt;
    std::size_t rank = 0;
    for (std::size_t i = 0; i < blk.arity; ++i) rank = rank * L.n + static_cast<std::size_t>(c[L.r_at(i)]);
    mc.input_pos = blk.offset + rank;
  } else {
    for (std::size_t i = 0; i < L.a; ++i)
      if (c[L.r_at(i)] != 0) return std::nullopt;
    if (static_cast<std::size_t>(p) >= L.const_bits) return std::nullopt;
    mc.input_pos = blk.offset + (L.const_bits - 1 - static_cast<std::size_t>(p));
  }
  std::size_t word = 0;
  for (std::size_t j = 0; j < L.t; ++j) word = word * L.n + static_cast<std::size_t>(c[L.vbar_at(j)]);
  if (word >= L.h) return std::nullopt;
  auto v = static_cast<std::size_t>(c[L.v_at()]);
  if (v >= L.word_bits) return std::nullopt;
  mc.work_pos = word * L.word_bits + v;
  (void)max;
  return mc;
}

inline Tuple encode_config(const ConfigLayout& L, const MachineConfig& mc) {
  Tuple c(L.g, 0);
  c[L.q_at()] = static_cast<Element>(mc.state);
  for (std::size_t i = 0; i < L.h; ++i) {
    std::size_t w = 0;
    for (std::size_t b = 0; b < L.word_bits; ++b) w |= static_cast<std::size_t>(mc.tape[i * L.word_bits + b]) << b;
    c[L.w_at(i)] = static_cast<Element>(w);
  }
  std::size_t s = 0;
  while (s + 1 < L.blocks.size() && L.blocks[s + 1].offset <= mc.input_pos) ++s;
  c[L.s_at()] = static_cast<Element>(s);
  const auto& blk = L.blocks[s];
  std::size_t local = mc.input_pos - blk.offset;
  if (blk.relation) {
    for (std::size_t i = blk.arity; i-- > 0;) {
      c[L.r_at(i)] = static_cast<Element>(local % L.n);
      local /= L.n;
    }
  } else {
    c[L.p_at()] = static_cast<Element>(L.const_bits - 1 - local);
  }
  std::size_t word = mc.work_pos / L.word_bits;
  for (std::size_t j = L.t; j-- > 0;) {
    c[L.vbar_at(j)] = static_cast<Element>(word % L.n);
    word /= L.n;
  }
  c[L.v_at()] = static_cast<Element>(mc.work_pos % L.word_bits);
  return c;
}

/// Digraph on all g-tuples (rank-indexed) with constants s = 0̄ and t = max̄.
/// Edges: machine steps between valid configurations, every accepting configuration
/// to max̄, and a loop at max̄ (max̄ itself never encodes a configuration).
inline Structure config_graph(const NTMSpec& M, const Structure& A, std::size_t node_limit = 1'000'000) {
  ConfigLayout L = make_layout(M, A.vocab(), A.size());
  long double nodes = std::pow(static_cast<long double>(L.n), static_cast<long double>(L.g));
  if (nodes > static_cast<long double>(node_limit))
    throw BoundExceeded("configuration graph has n^g = " + std::to_string(static_cast<unsigned long long>(nodes)) +
                        " nodes, limit " + std::to_string(node_limit));
  const std::size_t N = checked_power(L.n, L.g);
  std::string input = encode_binary(A);
  Relation E(2, N);
  const std::size_t top = N - 1;
  for (std::size_t idx = 0; idx < N; ++idx) {
    auto mc = decode_config(L, M.states, tuple_unrank(idx, L.g, L.n));
    if (!mc) continue;
    for (const auto& d : detail::step(M, input, *mc)) {
      std::size_t j = tuple_rank(encode_config(L, d), L.n);
      E.insert(Tuple{static_cast<Element>(idx), static_cast<Element>(j)});
    }
    if (mc->state == M.accept) E.insert(Tuple{static_cast<Element>(idx), static_cast<Element>(top)});
  }
  E.insert(Tuple{static_cast<Element>(top), static_cast<Element>(top)});
  Vocabulary gv({{"E", 2}}, {"s", "t"});
  return Structure::from_relations(gv, N, {E}, {0, static_cast<Element>(top)});
}

/// Breadth-first reachability of t from s in a graph with relation E.
inline bool graph_reaches(const Structure& G) {
  const Relation& E = G.relation("E");
  const std::size_t N = G.size();
  std::vector<char> seen(N, 0);
  std::deque<std::size_t> q{static_cast<std::size_t>(G.constant("s"))};
  seen[q.front()] = 1;
  while (!q.empty()) {
    std::size_t x = q.front();
    q.pop_front();
    if (x == static_cast<std::size_t>(G.constant("t"))) return true;
    for (std::size_t y = 0; y < N; ++y)
      if (!seen[y] && E.contains_rank(x * N + y)) {
        seen[y] = 1;
        q.push_back(y);
      }
  }
  return false;
}

// ---- Savitch formulas ----------------------------------------------------------------

namespace detail {

/// Renames every variable occurrence (free and bound) by a bijection.
inline Formula permute_vars(const Formula& f, const std::map<SymId, SymId>& perm) {
  auto mv = [&](SymId v) {
    auto it = perm.find(v);
    return it == perm.end() ? v : it->second;
  };
  auto mt = [&](Terms ts) {
    for (auto& t : ts)
      if (t.is_var) t.id = mv(t.id);
    return ts;
  };
  switch (f->kind) {
  case Kind::Eq: return eq(mt(f->lhs), mt(f->rhs));
  case Kind::Rel: return rel(f->rel, mt(f->lhs));
  case Kind::True:
  case Kind::False: return f;
  case Kind::Not: return neg(permute_vars(f->kids[0], perm));
  case Kind::Or:
  case Kind::And:
  case Kind::Implies:
  case Kind::Iff: return binary(f->kind, permute_vars(f->kids[0], perm), permute_vars(f->kids[1], perm));
  case Kind::Exists:
  case Kind::Forall: return quant(f->kind, mv(f->var), permute_vars(f->kids[0], perm));
  default: throw Error("variable permutation needs a first-order formula");
  }
}

} // namespace detail

/// φ₀(x,y) = E(x,y); φ_{i+1}(x,y) = ∃z∀u∀v(((u=x∧v=z)∨(u=z∧v=y)) → φ_i(u,v)).
inline Formula savitch_formula(std::size_t i, const std::string& edge = "E") {
  SymId x = intern("x"), y = intern("y"), z = intern("z"), u = intern("u"), v = intern("v");
  std::map<SymId, SymId> perm{{x, u}, {y, v}, {z, x}, {u, y}, {v, z}};
  auto T = [](SymId s) { return Term::var(s); };
  Formula f = rel(edge, {T(x), T(y)});
  for (std::size_t k = 0; k < i; ++k) {
    Formula guard = disj(conj(eq(T(u), T(x)), eq(T(v), T(z))), conj(eq(T(u), T(z)), eq(T(v), T(y))));
    f = exists(z, forall(u, forall(v, implies(guard, detail::permute_vars(f, perm)))));
  }
  return f;
}

// ---- edge formula ----------------------------------------------------------------

struct EdgeFormula {
  Formula formula;
  std::vector<SymId> from, to;
  Count psi1 = 0, psi2 = 0, psi3 = 0; // connectives summed over table entries
  ConfigLayout layout;
};

namespace detail {

class EdgeBuilder {
public:
  EdgeBuilder(const NTMSpec& M, const ConfigLayout& L) : M_(M), L_(L) {
    h1_ = intern("w1");
    h2_ = intern("w2");
    hx_ = intern("w3");
  }

  Formula num(const Term& t, std::size_t k, bool alt = false) const {
    if (k >= L_.n) throw Error("numeral " + std::to_string(k) + " outside the universe");
    if (k == 0) return eq(t, Term::constant("0"));
    if (k == 1) return eq(t, Term::constant("1"));
    if (k == L_.n - 1) return eq(t, Term::constant("max"));
    SymId y = alt ? h2_ : h1_;
    return exists(y, conj(rel("SUC", {Term::var(y), t}), num(Term::var(y), k - 1, !alt)));
  }

  Formula num_below(const Term& t, std::size_t k) const {
    if (k >= L_.n) return top();
    std::vector<Formula> ds;
    for (std::size_t j = 0; j < k; ++j) ds.push_back(num(t, j));
    return big_or(ds);
  }

  Formula encodes_word(const Terms& c, std::size_t i) const {
    std::vector<Formula> cs;
    for (std::size_t j = L_.t; j-- > 0;) {
      cs.push_back(num(c[L_.vbar_at(j)], i % L_.n));
      i /= L_.n;
    }
    std::reverse(cs.begin(), cs.end());
    return big_and(cs);
  }

  Formula all_eq(const Terms& c, const Terms& d, std::size_t from, std::size_t count) const {
    std::vector<Formula> cs;
    for (std::size_t i = from; i < from + count; ++i) cs.push_back(eq(c[i], d[i]));
    return big_and(cs);
  }

  Formula all_num(const Terms& c, std::size_t from, std::size_t count, std::size_t k) const {
    std::vector<Formula> cs;
    for (std::size_t i = from; i < from + count; ++i) cs.push_back(num(c[i], k));
    return big_and(cs);
  }

  Formula valid(const Terms& c) const {
    std::vector<Formula> cs{num_below(c[L_.q_at()], M_.states)};
    for (std::size_t i = 0; i < L_.h; ++i) cs.push_back(num_below(c[L_.w_at(i)], std::size_t{1} << L_.word_bits));
    std::vector<Formula> blocks;
    for (std::size_t j = 0; j < L_.blocks.size(); ++j) {
      const auto& b = L_.blocks[j];
      std::vector<Formula> bs{num(c[L_.s_at()], j)};
      if (b.relation) {
        bs.push_back(all_num(c, L_.r_at(b.arity), L_.a - b.arity, 0));
        bs.push_back(num(c[L_.p_at()], 0));
      } else {
        bs.push_back(all_num(c, L_.r_at(0), L_.a, 0));
        bs.push_back(num_below(c[L_.p_at()], L_.const_bits));
      }
      blocks.push_back(big_and(bs));
    }
    cs.push_back(big_or(blocks));
    std::vector<Formula> words;
    for (std::size_t i = 0; i < L_.h; ++i) words.push_back(encodes_word(c, i));
    cs.push_back(big_or(words));
    cs.push_back(num_below(c[L_.v_at()], L_.word_bits));
    return big_and(cs);
  }

  Formula input_bit(const Terms& c, int bit) const {
    std::vector<Formula> ds;
    for (std::size_t j = 0; j < L_.blocks.size(); ++j) {
      const auto& b = L_.blocks[j];
      Formula read;
      if (b.dummy) read = bit ? bottom() : top();
      else if (b.relation) {
        Terms args(c.begin() + static_cast<long>(L_.r_at(0)), c.begin() + static_cast<long>(L_.r_at(b.arity)));
        read = rel(b.name, args);
        if (!bit) read = neg(read);
      } else {
        read = rel("BIT", {Term::constant(b.name), c[L_.p_at()]});
        if (!bit) read = neg(read);
      }
      ds.push_back(conj(num(c[L_.s_at()], j), read));
    }
    return big_or(ds);
  }

  // r' is the successor of r among k-tuples in rank order.
  Formula tuple_succ(const Terms& c, const Terms& d, std::size_t k) const {
    std::vector<Formula> ds;
    for (std::size_t l = 0; l < k; ++l) {
      std::vector<Formula> cs;
      for (std::size_t j = 0; j < l; ++j) cs.push_back(eq(d[L_.r_at(j)], c[L_.r_at(j)]));
      cs.push_back(rel("SUC", {c[L_.r_at(l)], d[L_.r_at(l)]}));
      for (std::size_t j = l + 1; j < k; ++j) {
        cs.push_back(num(c[L_.r_at(j)], L_.n - 1));
        cs.push_back(num(d[L_.r_at(j)], 0));
      }
      ds.push_back(big_and(cs));
    }
    return big_or(ds);
  }

  // Head position at the first (or last) bit of block j.
  Formula block_edge(const Terms& d, std::size_t j, bool last) const {
    const auto& b = L_.blocks[j];
    std::vector<Formula> cs{num(d[L_.s_at()], j)};
    if (b.relation) {
      cs.push_back(all_num(d, L_.r_at(0), b.arity, last ? L_.n - 1 : 0));
      cs.push_back(all_num(d, L_.r_at(b.arity), L_.a - b.arity, 0));
      cs.push_back(num(d[L_.p_at()], 0));
    } else {
      cs.push_back(all_num(d, L_.r_at(0), L_.a, 0));
      cs.push_back(num(d[L_.p_at()], last ? 0 : L_.const_bits - 1));
    }
    return big_and(cs);
  }

  Formula input_move(const Terms& c, const Terms& d, HeadMove mv) const {
    if (mv == HeadMove::Stay) return all_eq(c, d, L_.s_at(), L_.a + 2);
    const bool right = mv == HeadMove::Right;
    std::vector<Formula> ds;
    for (std::size_t j = 0; j < L_.blocks.size(); ++j) {
      const auto& b = L_.blocks[j];
      Formula here = num(c[L_.s_at()], j);
      Formula same = eq(c[L_.s_at()], d[L_.s_at()]);
      if (b.relation) {
        Formula rest = conj(all_eq(c, d, L_.r_at(b.arity), L_.a - b.arity), eq(c[L_.p_at()], d[L_.p_at()]));
        Formula inner = right ? tuple_succ(c, d, b.arity) : tuple_succ(d, c, b.arity);
        ds.push_back(big_and({here, same, inner, rest}));
      } else {
        Formula inner = right ? rel("SUC", {d[L_.p_at()], c[L_.p_at()]}) : rel("SUC", {c[L_.p_at()], d[L_.p_at()]});
        ds.push_back(big_and({here, same, all_eq(c, d, L_.r_at(0), L_.a), inner}));
      }
      if (right && j + 1 < L_.blocks.size()) ds.push_back(conj(block_edge(c, j, true), block_edge(d, j + 1, false)));
      if (!right && j > 0) ds.push_back(conj(block_edge(c, j, false), block_edge(d, j - 1, true)));
    }
    return big_or(ds);
  }

  Formula work_move(const Terms& c, const Terms& d, std::size_t i, HeadMove mv) const {
    Formula vbar_same = all_eq(c, d, L_.vbar_at(0), L_.t);
    const Term& v = c[L_.v_at()];
    const Term& v2 = d[L_.v_at()];
    if (mv == HeadMove::Stay) return conj(vbar_same, eq(v, v2));
    std::vector<Formula> ds;
    if (mv == HeadMove::Right) {
      ds.push_back(conj(vbar_same, rel("SUC", {v, v2})));
      if (i + 1 < L_.h) ds.push_back(big_and({num(v, L_.word_bits - 1), encodes_word(d, i + 1), num(v2, 0)}));
    } else {
      ds.push_back(conj(vbar_same, rel("SUC", {v2, v})));
      if (i > 0) ds.push_back(big_and({num(v, 0), encodes_word(d, i - 1), num(v2, L_.word_bits - 1)}));
    }
    return big_or(ds);
  }

  Formula bit(const Term& w, const Term& pos, int value) const {
    Formula b = rel("BIT", {w, pos});
    return value ? b : neg(b);
  }

  Formula work_part(const Terms& c, const Terms& d, const Transition& tr) const {
    std::vector<Formula> ds;
    Term x = Term::var(hx_);
    const Term& v = c[L_.v_at()];
    for (std::size_t i = 0; i < L_.h; ++i) {
      const Term& wi = c[L_.w_at(i)];
      const Term& wi2 = d[L_.w_at(i)];
      std::vector<Formula> others;
      for (std::size_t j = 0; j < L_.h; ++j)
        if (j != i) others.push_back(eq(c[L_.w_at(j)], d[L_.w_at(j)]));
      Formula keep = forall(hx_, implies(neg(eq(x, v)), iff(rel("BIT", {wi, x}), rel("BIT", {wi2, x}))));
      ds.push_back(big_and({encodes_word(c, i), bit(wi, v, tr.work_bit), bit(wi2, v, tr.write_bit), big_and(others), keep,
                            work_move(c, d, i, tr.work_move)}));
    }
    return big_or(ds);
  }

  EdgeFormula build(const Terms& c, const Terms& d) const {
    EdgeFormula ef;
    ef.layout = L_;
    std::vector<Formula> entries;
    for (const auto& tr : M_.table) {
      Formula p1 = conj(num(c[L_.q_at()], tr.state), num(d[L_.q_at()], tr.next_state));
      Formula p2 = conj(input_bit(c, tr.input_bit), input_move(c, d, tr.input_move));
      Formula p3 = work_part(c, d, tr);
      ef.psi1 += p1->connectives;
      ef.psi2 += p2->connectives;
      ef.psi3 += p3->connectives;
      entries.push_back(big_and({p1, p2, p3}));
    }
    Formula steps = big_and({valid(c), valid(d), big_or(entries)});
    Terms maxes(L_.g, Term::constant("max"));
    Formula to_top = big_and({valid(c), num(c[L_.q_at()], M_.accept), eq(d, maxes)});
    Formula loop = conj(eq(c, maxes), eq(d, maxes));
    ef.formula = big_or({steps, to_top, loop});
    return ef;
  }

private:
  const NTMSpec& M_;
  const ConfigLayout& L_;
  SymId h1_, h2_, hx_;
};

inline std::vector<SymId> tuple_vars(const std::string& base, std::size_t g) {
  std::vector<SymId> out;
  for (std::size_t i = 0; i < g; ++i) out.push_back(intern(base + std::to_string(i + 1)));
  return out;
}

inline void require_compilable(const NTMSpec& M, const Vocabulary& vocab, std::size_t n) {
  if (n < 2) throw Error("edge formula needs n >= 2 (BIT requires two elements)");
  if (!vocab.has_builtins()) throw Error("edge formula needs a vocabulary with built-in numeric predicates");
  if (M.states > n) throw Error("machine has " + std::to_string(M.states) + " states, more than n = " + std::to_string(n));
}

} // namespace detail

/// ψ_E over configuration tuples x1..xg (from) and y1..yg (to).
inline EdgeFormula edge_formula(const NTMSpec& M, const Vocabulary& vocab, std::size_t n) {
  detail::require_compilable(M, vocab, n);
  ConfigLayout L = make_layout(M, vocab, n);
  auto from = detail::tuple_vars("x", L.g), to = detail::tuple_vars("y", L.g);
  detail::EdgeBuilder eb(M, L);
  EdgeFormula ef = eb.build(var_terms(from), var_terms(to));
  ef.from = from;
  ef.to = to;
  return ef;
}

struct CompiledSentence {
  Formula sentence;
  ConfigLayout layout;
  std::size_t savitch_level = 0;
  Count skeleton_connectives = 0;
  Count edge_connectives = 0;
  Count psi1 = 0, psi2 = 0, psi3 = 0;
  Count connectives = 0;
  std::size_t distinct_variables = 0;
};

/// φ_{g⌈log n⌉}[0̄, max̄] with E replaced by ψ_E and each variable widened to a g-tuple.
inline CompiledSentence compile_sentence(const NTMSpec& M, const Vocabulary& vocab, std::size_t n) {
  detail::require_compilable(M, vocab, n);
  CompiledSentence cs;
  cs.layout = make_layout(M, vocab, n);
  const auto& L = cs.layout;
  cs.savitch_level = L.g * ceil_log2(n);
  Formula skel = savitch_formula(cs.savitch_level);
  cs.skeleton_connectives = skel->connectives;
  std::map<SymId, Terms> wide;
  for (const char* b : {"x", "y", "z", "u", "v"}) wide[intern(b)] = var_terms(detail::tuple_vars(b, L.g));
  wide[intern("x")] = Terms(L.g, Term::constant("0"));
  wide[intern("y")] = Terms(L.g, Term::constant("max"));
  detail::EdgeBuilder eb(M, L);
  std::function<Formula(const Formula&, const std::map<SymId, Terms>&)> go =
      [&](const Formula& f, const std::map<SymId, Terms>& env) -> Formula {
    auto tup = [&](const Term& t) { return env.at(t.id); };
    switch (f->kind) {
    case Kind::Eq: return eq(tup(f->lhs[0]), tup(f->rhs[0]));
    case Kind::Rel: {
      EdgeFormula ef = eb.build(tup(f->lhs[0]), tup(f->lhs[1]));
      cs.edge_connectives = ef.formula->connectives;
      cs.psi1 = ef.psi1;
      cs.psi2 = ef.psi2;
      cs.psi3 = ef.psi3;
      return ef.formula;
    }
    case Kind::Not: return neg(go(f->kids[0], env));
    case Kind::Or:
    case Kind::And:
    case Kind::Implies:
    case Kind::Iff: return binary(f->kind, go(f->kids[0], env), go(f->kids[1], env));
    case Kind::Exists:
    case Kind::Forall: {
      auto inner = env;
      std::vector<SymId> vs = detail::tuple_vars(sym_name(f->var), L.g);
      inner[f->var] = var_terms(vs);
      Formula body = go(f->kids[0], inner);
      return f->kind == Kind::Exists ? exists(vs, body) : forall(vs, body);
    }
    default: throw Error("unexpected node in the Savitch skeleton");
    }
  };
  cs.sentence = go(skel, wide);
  cs.connectives = cs.sentence->connectives;
  cs.distinct_variables = cs.sentence->all_vars.size();
  return cs;
}

} // namespace fmw
