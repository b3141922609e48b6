#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/symbols.hpp"

namespace fmw {

enum class Kind { Eq, Rel, True, False, Not, Or, And, Implies, Iff, Exists, Forall, Fix, Sim };
enum class FixOp { LFP, IFP, PFP };

inline const char* fix_op_name(FixOp op) {
  switch (op) {
  case FixOp::LFP: return "lfp";
  case FixOp::IFP: return "ifp";
  case FixOp::PFP: return "pfp";
  }
  return "?";
}

/// A term is a first-order variable or a constant symbol (numerals 0 and 1 included).
struct Term {
  bool is_var = true;
  SymId id = -1;
  static Term var(SymId v) { return {true, v}; }
  static Term var(const std::string& v) { return {true, intern(v)}; }
  static Term constant(SymId c) { return {false, c}; }
  static Term constant(const std::string& c) { return {false, intern(c)}; }
  friend bool operator==(const Term&, const Term&) = default;
};

using Terms = std::vector<Term>;

inline Terms var_terms(const std::vector<SymId>& vs) {
  Terms t;
  for (auto v : vs) t.push_back(Term::var(v));
  return t;
}

struct Node;
using Formula = std::shared_ptr<const Node>;

struct SimComponent {
  SymId rel = -1;
  std::vector<SymId> vars;
  Formula body;
};

using Count = std::uint64_t;

inline Count sat_add(Count a, Count b) {
  Count r = a + b;
  return r < a ? std::numeric_limits<Count>::max() : r;
}

/// Immutable formula node. Children are shared; per-node metadata is computed
/// once at construction so that metrics on heavily shared formulas stay cheap.
struct Node {
  Kind kind = Kind::True;
  Terms lhs, rhs;                // Eq: both sides; Rel: arguments in lhs
  SymId rel = -1;                // Rel: symbol; Fix: bound relation variable
  std::vector<Formula> kids;     // Not/quantifiers/Fix: one; binary: two
  SymId var = -1;                // quantified variable
  FixOp op = FixOp::LFP;
  std::vector<SymId> bound;      // Fix: x̄
  std::vector<SimComponent> comps;
  std::size_t select = 0;
  Terms args;                    // Fix/Sim applied terms

  // metadata
  std::vector<SymId> free_vars;  // sorted
  std::vector<SymId> all_vars;   // sorted, every first-order variable occurring
  std::vector<SymId> free_rels;  // sorted, relation symbols not bound inside
  bool fixpoint_free = true;
  std::size_t qr = 0;
  Count connectives = 0;
  Count foralls = 0;
  Count exists = 0;
  Count size = 1;
};

namespace detail {

inline void sorted_insert(std::vector<SymId>& v, SymId x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

inline std::vector<SymId> sorted_union(const std::vector<SymId>& a, const std::vector<SymId>& b) {
  std::vector<SymId> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::vector<SymId> sorted_minus(const std::vector<SymId>& a, std::vector<SymId> b) {
  std::sort(b.begin(), b.end());
  std::vector<SymId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline void add_terms(std::vector<SymId>& vars, const Terms& ts) {
  for (const auto& t : ts)
    if (t.is_var) sorted_insert(vars, t.id);
}

inline void finalize(Node& n) {
  switch (n.kind) {
  case Kind::Eq:
    add_terms(n.free_vars, n.lhs);
    add_terms(n.free_vars, n.rhs);
    n.all_vars = n.free_vars;
    break;
  case Kind::Rel:
    add_terms(n.free_vars, n.lhs);
    n.all_vars = n.free_vars;
    n.free_rels = {n.rel};
    break;
  case Kind::True:
  case Kind::False:
    break;
  case Kind::Not:
  case Kind::Or:
  case Kind::And:
  case Kind::Implies:
  case Kind::Iff:
    for (const auto& k : n.kids) {
      n.free_vars = sorted_union(n.free_vars, k->free_vars);
      n.all_vars = sorted_union(n.all_vars, k->all_vars);
      n.free_rels = sorted_union(n.free_rels, k->free_rels);
      n.fixpoint_free = n.fixpoint_free && k->fixpoint_free;
      n.qr = std::max(n.qr, k->qr);
      n.connectives = sat_add(n.connectives, k->connectives);
      n.foralls = sat_add(n.foralls, k->foralls);
      n.exists = sat_add(n.exists, k->exists);
      n.size = sat_add(n.size, k->size);
    }
    if (n.kind == Kind::Or || n.kind == Kind::And || n.kind == Kind::Implies) n.connectives = sat_add(n.connectives, 1);
    if (n.kind == Kind::Iff) n.connectives = sat_add(n.connectives, 2);
    break;
  case Kind::Exists:
  case Kind::Forall: {
    const auto& k = n.kids[0];
    n.free_vars = sorted_minus(k->free_vars, {n.var});
    n.all_vars = k->all_vars;
    sorted_insert(n.all_vars, n.var);
    n.free_rels = k->free_rels;
    n.fixpoint_free = k->fixpoint_free;
    n.qr = k->qr + 1;
    n.connectives = k->connectives;
    n.foralls = sat_add(k->foralls, n.kind == Kind::Forall ? 1 : 0);
    n.exists = sat_add(k->exists, n.kind == Kind::Exists ? 1 : 0);
    n.size = sat_add(k->size, 1);
    break;
  }
  case Kind::Fix: {
    const auto& k = n.kids[0];
    add_terms(n.free_vars, n.args);
    n.free_vars = sorted_union(n.free_vars, sorted_minus(k->free_vars, n.bound));
    n.all_vars = k->all_vars;
    for (auto v : n.bound) sorted_insert(n.all_vars, v);
    add_terms(n.all_vars, n.args);
    n.free_rels = sorted_minus(k->free_rels, {n.rel});
    n.fixpoint_free = false;
    n.qr = k->qr;
    n.connectives = k->connectives;
    n.foralls = k->foralls;
    n.exists = k->exists;
    n.size = sat_add(k->size, 1);
    break;
  }
  case Kind::Sim: {
    add_terms(n.free_vars, n.args);
    add_terms(n.all_vars, n.args);
    std::vector<SymId> rels;
    for (const auto& c : n.comps) {
      rels.push_back(c.rel);
      n.free_vars = sorted_union(n.free_vars, sorted_minus(c.body->free_vars, c.vars));
      n.all_vars = sorted_union(n.all_vars, c.body->all_vars);
      for (auto v : c.vars) sorted_insert(n.all_vars, v);
      n.free_rels = sorted_union(n.free_rels, c.body->free_rels);
      n.qr = std::max(n.qr, c.body->qr);
      n.connectives = sat_add(n.connectives, c.body->connectives);
      n.foralls = sat_add(n.foralls, c.body->foralls);
      n.exists = sat_add(n.exists, c.body->exists);
      n.size = sat_add(n.size, c.body->size);
    }
    n.free_rels = sorted_minus(n.free_rels, rels);
    n.fixpoint_free = false;
    break;
  }
  }
}

inline Formula make(Node n) {
  finalize(n);
  return std::make_shared<const Node>(std::move(n));
}

} // namespace detail

// ---- constructors -----------------------------------------------------------

inline Formula eq(Terms l, Terms r) {
  if (l.size() != r.size() || l.empty()) throw Error("tuple equality needs two tuples of equal positive length");
  Node n;
  n.kind = Kind::Eq;
  n.lhs = std::move(l);
  n.rhs = std::move(r);
  return detail::make(std::move(n));
}
inline Formula eq(Term a, Term b) { return eq(Terms{a}, Terms{b}); }

inline Formula rel(SymId r, Terms args) {
  Node n;
  n.kind = Kind::Rel;
  n.rel = r;
  n.lhs = std::move(args);
  return detail::make(std::move(n));
}
inline Formula rel(const std::string& r, Terms args) { return rel(intern(r), std::move(args)); }

inline Formula top() {
  static const Formula t = [] { Node n; n.kind = Kind::True; return detail::make(std::move(n)); }();
  return t;
}
inline Formula bottom() {
  static const Formula f = [] { Node n; n.kind = Kind::False; return detail::make(std::move(n)); }();
  return f;
}

inline Formula neg(Formula a) {
  Node n;
  n.kind = Kind::Not;
  n.kids = {std::move(a)};
  return detail::make(std::move(n));
}

inline Formula binary(Kind k, Formula a, Formula b) {
  Node n;
  n.kind = k;
  n.kids = {std::move(a), std::move(b)};
  return detail::make(std::move(n));
}
inline Formula disj(Formula a, Formula b) { return binary(Kind::Or, std::move(a), std::move(b)); }
inline Formula conj(Formula a, Formula b) { return binary(Kind::And, std::move(a), std::move(b)); }
inline Formula implies(Formula a, Formula b) { return binary(Kind::Implies, std::move(a), std::move(b)); }
inline Formula iff(Formula a, Formula b) { return binary(Kind::Iff, std::move(a), std::move(b)); }

inline Formula quant(Kind k, SymId v, Formula body) {
  Node n;
  n.kind = k;
  n.var = v;
  n.kids = {std::move(body)};
  return detail::make(std::move(n));
}
inline Formula exists(SymId v, Formula body) { return quant(Kind::Exists, v, std::move(body)); }
inline Formula forall(SymId v, Formula body) { return quant(Kind::Forall, v, std::move(body)); }
inline Formula exists(const std::vector<SymId>& vs, Formula body) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = exists(*it, std::move(body));
  return body;
}
inline Formula forall(const std::vector<SymId>& vs, Formula body) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = forall(*it, std::move(body));
  return body;
}

/// Left-nested conjunction; T when empty.
inline Formula big_and(const std::vector<Formula>& fs) {
  if (fs.empty()) return top();
  Formula r = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) r = conj(r, fs[i]);
  return r;
}
/// Left-nested disjunction; F when empty.
inline Formula big_or(const std::vector<Formula>& fs) {
  if (fs.empty()) return bottom();
  Formula r = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) r = disj(r, fs[i]);
  return r;
}

bool is_positive_in(const Formula& f, SymId r);

inline Formula fix(FixOp op, SymId r, std::vector<SymId> bound, Formula body, Terms args) {
  if (bound.empty()) throw Error("fixed point needs at least one bound variable");
  if (bound.size() != args.size())
    throw Error("fixed point of arity " + std::to_string(bound.size()) + " applied to " + std::to_string(args.size()) +
                " terms");
  if (std::set<SymId>(bound.begin(), bound.end()).size() != bound.size())
    throw Error("fixed point bound variables must be distinct");
  if (op == FixOp::LFP && !is_positive_in(body, r))
    throw Error("lfp body is not positive in " + sym_name(r));
  Node n;
  n.kind = Kind::Fix;
  n.op = op;
  n.rel = r;
  n.bound = std::move(bound);
  n.kids = {std::move(body)};
  n.args = std::move(args);
  return detail::make(std::move(n));
}

inline Formula sim(FixOp op, std::vector<SimComponent> comps, std::size_t select, Terms args) {
  if (comps.empty()) throw Error("simultaneous system needs at least one component");
  if (select >= comps.size()) throw Error("selected component out of range");
  if (comps[select].vars.size() != args.size()) throw Error("simultaneous fixed point applied with wrong arity");
  std::set<SymId> names;
  for (const auto& c : comps) {
    if (c.vars.empty()) throw Error("simultaneous component needs bound variables");
    if (!names.insert(c.rel).second) throw Error("duplicate relation variable in simultaneous system");
  }
  if (op == FixOp::LFP)
    for (const auto& c : comps)
      for (const auto& d : comps)
        if (!is_positive_in(c.body, d.rel))
          throw Error("lfp system body for " + sym_name(c.rel) + " is not positive in " + sym_name(d.rel));
  Node n;
  n.kind = Kind::Sim;
  n.op = op;
  n.comps = std::move(comps);
  n.select = select;
  n.args = std::move(args);
  return detail::make(std::move(n));
}

// ---- structural helpers -----------------------------------------------------

inline bool equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
  case Kind::Eq: return a->lhs == b->lhs && a->rhs == b->rhs;
  case Kind::Rel: return a->rel == b->rel && a->lhs == b->lhs;
  case Kind::True:
  case Kind::False: return true;
  case Kind::Not:
  case Kind::Or:
  case Kind::And:
  case Kind::Implies:
  case Kind::Iff:
    for (std::size_t i = 0; i < a->kids.size(); ++i)
      if (!equal(a->kids[i], b->kids[i])) return false;
    return true;
  case Kind::Exists:
  case Kind::Forall: return a->var == b->var && equal(a->kids[0], b->kids[0]);
  case Kind::Fix:
    return a->op == b->op && a->rel == b->rel && a->bound == b->bound && a->args == b->args &&
           equal(a->kids[0], b->kids[0]);
  case Kind::Sim:
    if (a->op != b->op || a->select != b->select || a->args != b->args || a->comps.size() != b->comps.size())
      return false;
    for (std::size_t i = 0; i < a->comps.size(); ++i)
      if (a->comps[i].rel != b->comps[i].rel || a->comps[i].vars != b->comps[i].vars ||
          !equal(a->comps[i].body, b->comps[i].body))
        return false;
    return true;
  }
  return false;
}

/// Variable names accepted by the parser: x,y,z,u,v,w optionally followed by digits.
inline bool is_variable_name(const std::string& s) {
  if (s.empty() || std::string("xyzuvw").find(s[0]) == std::string::npos) return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// A variable named prefix<k> not in avoid, smallest k >= 1.
inline SymId fresh_var(const std::set<SymId>& avoid, const std::string& prefix = "v") {
  for (int k = 1;; ++k) {
    SymId id = intern(prefix + std::to_string(k));
    if (!avoid.count(id)) return id;
  }
}

// ---- printing -----------------------------------------------------------------

inline std::string term_string(const Term& t) { return sym_name(t.id); }

inline std::string terms_string(const Terms& ts) {
  std::string s;
  for (std::size_t i = 0; i < ts.size(); ++i) s += (i ? "," : "") + term_string(ts[i]);
  return s;
}

inline std::string vars_string(const std::vector<SymId>& vs) {
  std::string s;
  for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + sym_name(vs[i]);
  return s;
}

/// Fully parenthesized text that the parser reads back to an equal tree.
inline std::string to_string(const Formula& f) {
  switch (f->kind) {
  case Kind::Eq:
    if (f->lhs.size() == 1) return term_string(f->lhs[0]) + "=" + term_string(f->rhs[0]);
    return "(" + terms_string(f->lhs) + ")=(" + terms_string(f->rhs) + ")";
  case Kind::Rel:
    if (sym_name(f->rel) == "<" && f->lhs.size() == 2) return term_string(f->lhs[0]) + "<" + term_string(f->lhs[1]);
    return sym_name(f->rel) + "(" + terms_string(f->lhs) + ")";
  case Kind::True: return "T";
  case Kind::False: return "F";
  case Kind::Not: return "!" + to_string(f->kids[0]);
  case Kind::Or: return "(" + to_string(f->kids[0]) + " | " + to_string(f->kids[1]) + ")";
  case Kind::And: return "(" + to_string(f->kids[0]) + " & " + to_string(f->kids[1]) + ")";
  case Kind::Implies: return "(" + to_string(f->kids[0]) + " -> " + to_string(f->kids[1]) + ")";
  case Kind::Iff: return "(" + to_string(f->kids[0]) + " <-> " + to_string(f->kids[1]) + ")";
  case Kind::Exists: return "(E " + sym_name(f->var) + " . " + to_string(f->kids[0]) + ")";
  case Kind::Forall: return "(A " + sym_name(f->var) + " . " + to_string(f->kids[0]) + ")";
  case Kind::Fix:
    return std::string("[") + fix_op_name(f->op) + " " + sym_name(f->rel) + "(" + vars_string(f->bound) +
           "): " + to_string(f->kids[0]) + "](" + terms_string(f->args) + ")";
  case Kind::Sim: {
    std::string s = std::string("[") + fix_op_name(f->op) + " sim {";
    for (std::size_t i = 0; i < f->comps.size(); ++i) {
      const auto& c = f->comps[i];
      s += (i ? " ; " : "") + sym_name(c.rel) + "(" + vars_string(c.vars) + "): " + to_string(c.body);
    }
    return s + "} select " + sym_name(f->comps[f->select].rel) + "](" + terms_string(f->args) + ")";
  }
  }
  return "?";
}

// ---- metrics ----------------------------------------------------------------

struct MetricReport {
  std::size_t quantifier_rank = 0;
  std::size_t distinct_variables = 0;
  Count connectives = 0;
  Count forall_symbols = 0;
  Count exists_symbols = 0;
};

inline std::size_t quantifier_rank(const Formula& f) { return f->qr; }

inline MetricReport count_metrics(const Formula& f) {
  return {f->qr, f->all_vars.size(), f->connectives, f->foralls, f->exists};
}

/// Number of distinct nodes in the shared representation.
inline std::size_t dag_size(const Formula& f) {
  std::set<const Node*> seen;
  std::vector<const Node*> stack{f.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    for (const auto& k : n->kids) stack.push_back(k.get());
    for (const auto& c : n->comps) stack.push_back(c.body.get());
  }
  return seen.size();
}

// ---- positivity ----------------------------------------------------------------

namespace detail {

struct PositivityCheck {
  SymId r;
  std::map<std::pair<const Node*, bool>, bool> memo;

  // True when every free occurrence of r has even polarity given the parity flag.
  bool ok(const Formula& f, bool negated) {
    if (!std::binary_search(f->free_rels.begin(), f->free_rels.end(), r)) return true;
    auto key = std::make_pair(f.get(), negated);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    bool res = true;
    switch (f->kind) {
    case Kind::Rel: res = !negated; break;
    case Kind::Not: res = ok(f->kids[0], !negated); break;
    case Kind::Or:
    case Kind::And: res = ok(f->kids[0], negated) && ok(f->kids[1], negated); break;
    case Kind::Implies: res = ok(f->kids[0], !negated) && ok(f->kids[1], negated); break;
    case Kind::Iff:
      res = ok(f->kids[0], negated) && ok(f->kids[0], !negated) && ok(f->kids[1], negated) &&
            ok(f->kids[1], !negated);
      break;
    case Kind::Exists:
    case Kind::Forall:
    case Kind::Fix: res = ok(f->kids[0], negated); break;
    case Kind::Sim:
      for (const auto& c : f->comps) res = res && ok(c.body, negated);
      break;
    default: break;
    }
    memo[key] = res;
    return res;
  }
};

} // namespace detail

/// True iff, after expanding sugar into !, | and E, every free occurrence of r
/// lies under an even number of negations.
inline bool is_positive_in(const Formula& f, SymId r) {
  detail::PositivityCheck c{r, {}};
  return c.ok(f, false);
}
inline bool is_positive_in(const Formula& f, const std::string& r) { return is_positive_in(f, intern(r)); }

// ---- substitution ---------------------------------------------------------------

using Substitution = std::map<SymId, Term>;

namespace detail {

inline Terms apply_terms(const Terms& ts, const Substitution& s) {
  Terms out = ts;
  for (auto& t : out)
    if (t.is_var)
      if (auto it = s.find(t.id); it != s.end()) t = it->second;
  return out;
}

inline std::set<SymId> range_vars(const Substitution& s) {
  std::set<SymId> out;
  for (auto& [k, t] : s)
    if (t.is_var) out.insert(t.id);
  return out;
}

class Substituter {
public:
  explicit Substituter(Substitution s) : s_(std::move(s)) {}

  Formula run(const Formula& f) {
    bool touches = false;
    for (auto& [k, _] : s_)
      if (std::binary_search(f->free_vars.begin(), f->free_vars.end(), k)) touches = true;
    if (!touches) return f;
    if (auto it = memo_.find(f.get()); it != memo_.end()) return it->second;
    Formula out = go(f);
    memo_[f.get()] = out;
    return out;
  }

private:
  // Substitution restricted to keys free in f, minus the given binders.
  Substitution restrict(const Formula& body, const std::vector<SymId>& binders) const {
    Substitution r;
    for (auto& [k, t] : s_)
      if (std::find(binders.begin(), binders.end(), k) == binders.end() &&
          std::binary_search(body->free_vars.begin(), body->free_vars.end(), k))
        r[k] = t;
    return r;
  }

  // Rename binders that would capture a range variable; returns renamed binders.
  std::vector<SymId> rebind(const std::vector<SymId>& binders, const std::vector<Formula>& bodies, Substitution& inner) {
    std::set<SymId> avoid = range_vars(inner);
    for (auto& b : bodies) avoid.insert(b->all_vars.begin(), b->all_vars.end());
    for (auto& [k, _] : inner) avoid.insert(k);
    std::vector<SymId> out = binders;
    if (inner.empty()) return out;
    std::set<SymId> rv = range_vars(inner);
    for (auto& b : out) {
      if (!rv.count(b)) continue;
      SymId fresh = fresh_var(avoid);
      avoid.insert(fresh);
      inner[b] = Term::var(fresh);
      b = fresh;
    }
    return out;
  }

  Formula go(const Formula& f) {
    switch (f->kind) {
    case Kind::Eq: return eq(apply_terms(f->lhs, s_), apply_terms(f->rhs, s_));
    case Kind::Rel: return rel(f->rel, apply_terms(f->lhs, s_));
    case Kind::True:
    case Kind::False: return f;
    case Kind::Not: return neg(run(f->kids[0]));
    case Kind::Or:
    case Kind::And:
    case Kind::Implies:
    case Kind::Iff: return binary(f->kind, run(f->kids[0]), run(f->kids[1]));
    case Kind::Exists:
    case Kind::Forall: {
      Substitution inner = restrict(f->kids[0], {f->var});
      auto b = rebind({f->var}, {f->kids[0]}, inner);
      return quant(f->kind, b[0], Substituter(inner).run(f->kids[0]));
    }
    case Kind::Fix: {
      Substitution inner = restrict(f->kids[0], f->bound);
      auto b = rebind(f->bound, {f->kids[0]}, inner);
      return fix(f->op, f->rel, b, Substituter(inner).run(f->kids[0]), apply_terms(f->args, s_));
    }
    case Kind::Sim: {
      std::vector<SimComponent> comps;
      for (const auto& c : f->comps) {
        Substitution inner = restrict(c.body, c.vars);
        auto b = rebind(c.vars, {c.body}, inner);
        comps.push_back({c.rel, b, Substituter(inner).run(c.body)});
      }
      return sim(f->op, std::move(comps), f->select, apply_terms(f->args, s_));
    }
    }
    return f;
  }

  Substitution s_;
  std::unordered_map<const Node*, Formula> memo_;
};

} // namespace detail

/// Capture-avoiding substitution of terms for free variables.
inline Formula substitute(const Formula& f, const Substitution& s) {
  if (s.empty()) return f;
  return detail::Substituter(s).run(f);
}

/// Replaces each free occurrence of the relation symbol r by fn(arguments).
/// The replacement's free variables must be among the atom's own argument variables
/// (or otherwise not bound between the atom and the root).
inline Formula replace_relation(const Formula& f, SymId r, const std::function<Formula(const Terms&)>& fn) {
  std::unordered_map<const Node*, Formula> memo;
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    if (!std::binary_search(g->free_rels.begin(), g->free_rels.end(), r)) return g;
    if (auto it = memo.find(g.get()); it != memo.end()) return it->second;
    Formula out;
    switch (g->kind) {
    case Kind::Rel: out = fn(g->lhs); break;
    case Kind::Not: out = neg(go(g->kids[0])); break;
    case Kind::Or:
    case Kind::And:
    case Kind::Implies:
    case Kind::Iff: out = binary(g->kind, go(g->kids[0]), go(g->kids[1])); break;
    case Kind::Exists:
    case Kind::Forall: out = quant(g->kind, g->var, go(g->kids[0])); break;
    case Kind::Fix: out = fix(g->op, g->rel, g->bound, go(g->kids[0]), g->args); break;
    case Kind::Sim: {
      auto comps = g->comps;
      for (auto& c : comps) c.body = go(c.body);
      out = sim(g->op, std::move(comps), g->select, g->args);
      break;
    }
    default: out = g;
    }
    memo[g.get()] = out;
    return out;
  };
  return go(f);
}

// ---- official syntax ---------------------------------------------------------------

/// Expands every abbreviation into the !, |, E, = fragment.
inline Formula to_official_syntax(const Formula& f) {
  std::unordered_map<const Node*, Formula> memo;
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    if (auto it = memo.find(g.get()); it != memo.end()) return it->second;
    Formula out;
    switch (g->kind) {
    case Kind::Eq:
      if (g->lhs.size() == 1) {
        out = g;
      } else {
        std::vector<Formula> parts;
        for (std::size_t i = 0; i < g->lhs.size(); ++i) parts.push_back(eq(g->lhs[i], g->rhs[i]));
        Formula acc = parts[0];
        for (std::size_t i = 1; i < parts.size(); ++i) acc = neg(disj(neg(acc), neg(parts[i])));
        out = acc;
      }
      break;
    case Kind::Rel: out = g; break;
    case Kind::True:
    case Kind::False: {
      SymId x = intern("x");
      Formula t = exists(x, eq(Term::var(x), Term::var(x)));
      out = g->kind == Kind::True ? t : neg(t);
      break;
    }
    case Kind::Not: out = neg(go(g->kids[0])); break;
    case Kind::Or: out = disj(go(g->kids[0]), go(g->kids[1])); break;
    case Kind::And: out = neg(disj(neg(go(g->kids[0])), neg(go(g->kids[1])))); break;
    case Kind::Implies: out = disj(neg(go(g->kids[0])), go(g->kids[1])); break;
    case Kind::Iff: {
      Formula a = go(g->kids[0]), b = go(g->kids[1]);
      Formula l = disj(neg(a), b), r = disj(neg(b), a);
      out = neg(disj(neg(l), neg(r)));
      break;
    }
    case Kind::Exists: out = exists(g->var, go(g->kids[0])); break;
    case Kind::Forall: out = neg(exists(g->var, neg(go(g->kids[0])))); break;
    case Kind::Fix: out = fix(g->op, g->rel, g->bound, go(g->kids[0]), g->args); break;
    case Kind::Sim: {
      auto comps = g->comps;
      for (auto& c : comps) c.body = go(c.body);
      out = sim(g->op, std::move(comps), g->select, g->args);
      break;
    }
    }
    memo[g.get()] = out;
    return out;
  };
  return go(f);
}

} // namespace fmw
