#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/evaluator.hpp"
#include "fmw/formula.hpp"
#include "fmw/structure.hpp"

namespace fmw {

// ---- quantifier blocks -------------------------------------------------------------

/// (Q z̄, M): (∃z̄, M)ψ is ∃z̄(M ∧ ψ), (∀z̄, M)ψ is ∀z̄(M → ψ).
struct GuardedQuantifier {
  bool universal = false;
  std::vector<SymId> vars;
  Formula guard;
};

struct QuantifierBlock {
  std::vector<GuardedQuantifier> prefix;
  Formula final_guard; // M_{s+1}, under ∃x̄
  SymId rel = -1;
  std::vector<SymId> vars; // x̄

  std::size_t arity() const { return vars.size(); }
};

namespace detail {

class FreshVars {
public:
  explicit FreshVars(std::set<SymId> avoid, std::string prefix = "w") : avoid_(std::move(avoid)), prefix_(std::move(prefix)) {}
  SymId next() {
    SymId v = fresh_var(avoid_, prefix_);
    avoid_.insert(v);
    return v;
  }
  std::vector<SymId> next(std::size_t k) {
    std::vector<SymId> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(next());
    return out;
  }
  void avoid(SymId v) { avoid_.insert(v); }

private:
  std::set<SymId> avoid_;
  std::string prefix_;
};

inline void require_first_order(const Formula& f, const char* what) {
  if (!f->fixpoint_free) throw Error(std::string(what) + " must be first-order (no fixed-point operators)");
}

/// Negation normal form with every quantifier bound to a fresh variable.
inline Formula nnf_renamed(const Formula& f, bool negated, FreshVars& fresh) {
  switch (f->kind) {
  case Kind::Eq:
  case Kind::Rel: return negated ? neg(f) : f;
  case Kind::True: return negated ? bottom() : top();
  case Kind::False: return negated ? top() : bottom();
  case Kind::Not: return nnf_renamed(f->kids[0], !negated, fresh);
  case Kind::Or:
  case Kind::And: {
    Formula a = nnf_renamed(f->kids[0], negated, fresh), b = nnf_renamed(f->kids[1], negated, fresh);
    bool is_and = (f->kind == Kind::And) != negated;
    return is_and ? conj(a, b) : disj(a, b);
  }
  case Kind::Implies: return nnf_renamed(disj(neg(f->kids[0]), f->kids[1]), negated, fresh);
  case Kind::Iff: {
    const Formula& a = f->kids[0];
    const Formula& b = f->kids[1];
    return nnf_renamed(disj(conj(a, b), conj(neg(a), neg(b))), negated, fresh);
  }
  case Kind::Exists:
  case Kind::Forall: {
    SymId v = fresh.next();
    Formula body = substitute(f->kids[0], {{f->var, Term::var(v)}});
    bool universal = (f->kind == Kind::Forall) != negated;
    Formula inner = nnf_renamed(body, negated, fresh);
    return universal ? forall(v, inner) : exists(v, inner);
  }
  case Kind::Fix:
  case Kind::Sim: break;
  }
  throw Error("quantifier-block normal form needs a first-order body");
}

inline bool mentions(const Formula& f, SymId r) {
  return std::binary_search(f->free_rels.begin(), f->free_rels.end(), r);
}

inline QuantifierBlock build_block(const Formula& f, SymId R, const std::vector<SymId>& xs, FreshVars& fresh) {
  const std::size_t k = xs.size();
  Terms xt = var_terms(xs);
  QuantifierBlock qb;
  qb.rel = R;
  qb.vars = xs;
  if (f->qr == 0 && !mentions(f, R)) {
    qb.prefix.push_back({true, {fresh.next()}, neg(f)});
    qb.final_guard = neg(eq(xt[0], xt[0]));
    return qb;
  }
  switch (f->kind) {
  case Kind::Rel: {
    if (f->rel != R) break;
    auto zs = fresh.next(k);
    qb.prefix.push_back({false, zs, eq(var_terms(zs), f->lhs)});
    qb.final_guard = eq(xt, var_terms(zs));
    return qb;
  }
  case Kind::Exists:
  case Kind::Forall: {
    QuantifierBlock inner = build_block(f->kids[0], R, xs, fresh);
    Term v = Term::var(f->var);
    qb.prefix.push_back({f->kind == Kind::Forall, {f->var}, eq(v, v)});
    qb.prefix.insert(qb.prefix.end(), inner.prefix.begin(), inner.prefix.end());
    qb.final_guard = inner.final_guard;
    return qb;
  }
  case Kind::And:
  case Kind::Or: {
    QuantifierBlock a = build_block(f->kids[0], R, xs, fresh);
    QuantifierBlock b = build_block(f->kids[1], R, xs, fresh);
    SymId v = fresh.next();
    auto us = fresh.next(k);
    Term vt = Term::var(v);
    Formula v0 = eq(vt, Term::constant("0")), v1 = eq(vt, Term::constant("1"));
    Substitution to_u;
    for (std::size_t i = 0; i < k; ++i) to_u[xs[i]] = Term::var(us[i]);
    Formula theta = disj(conj(v1, substitute(a.final_guard, to_u)), conj(v0, substitute(b.final_guard, to_u)));
    qb.prefix.push_back({f->kind == Kind::And, {v}, disj(v0, v1)});
    for (auto& g : a.prefix) qb.prefix.push_back({g.universal, g.vars, disj(g.guard, v0)});
    for (auto& g : b.prefix) qb.prefix.push_back({g.universal, g.vars, disj(g.guard, v1)});
    qb.prefix.push_back({false, us, theta});
    qb.final_guard = eq(var_terms(us), xt);
    return qb;
  }
  default: break;
  }
  throw Error("body is not " + sym_name(R) + "-positive");
}

} // namespace detail

/// Normal form (Q₁z₁,M₁)…(Q_s z_s,M_s)(∃x̄,M_{s+1})Rx̄ of an R-positive first-order body.
/// Uses the constants 0 and 1, so the block is meant for structures that interpret them.
inline QuantifierBlock to_quantifier_block(const Formula& body, SymId R, const std::vector<SymId>& xs) {
  detail::require_first_order(body, "quantifier-block body");
  if (xs.empty()) throw Error("relation variable needs positive arity");
  if (!is_positive_in(body, R)) throw Error("body is not " + sym_name(R) + "-positive");
  std::set<SymId> avoid(body->all_vars.begin(), body->all_vars.end());
  avoid.insert(xs.begin(), xs.end());
  detail::FreshVars fresh(avoid);
  Formula normal = detail::nnf_renamed(body, false, fresh);
  return detail::build_block(normal, R, xs, fresh);
}

/// The block applied to the relation variable itself: a formula in x̄ equivalent to the body.
inline Formula quantifier_block_formula(const QuantifierBlock& qb) {
  Formula f = exists(qb.vars, conj(qb.final_guard, rel(qb.rel, var_terms(qb.vars))));
  for (auto it = qb.prefix.rbegin(); it != qb.prefix.rend(); ++it)
    f = it->universal ? forall(it->vars, implies(it->guard, f)) : exists(it->vars, conj(it->guard, f));
  return f;
}

inline std::string to_string(const QuantifierBlock& qb) {
  std::string s;
  for (const auto& g : qb.prefix) s += std::string("(") + (g.universal ? "A " : "E ") + vars_string(g.vars) + ", " + to_string(g.guard) + ")";
  s += "(E " + vars_string(qb.vars) + ", " + to_string(qb.final_guard) + ")" + sym_name(qb.rel) + "(" + vars_string(qb.vars) + ")";
  return s;
}

/// [QB]^r seed, evaluated one block at a time.
inline Relation iterate_qb(const Structure& A, const QuantifierBlock& qb, std::size_t r,
                           const std::optional<Relation>& seed = std::nullopt, const Assignment& alpha = {}) {
  Relation cur = seed ? *seed : Relation(qb.arity(), A.size());
  if (cur.arity() != qb.arity() || cur.universe_size() != A.size()) throw Error("seed relation has the wrong shape");
  Formula f = quantifier_block_formula(qb);
  for (std::size_t i = 0; i < r; ++i) {
    Assignment a = alpha;
    a.rels[qb.rel] = cur;
    cur = define(A, f, qb.vars, a);
  }
  return cur;
}

// ---- stage unfolding -----------------------------------------------------------------

/// φⁿ(x̄): φ⁰ = ¬x₁=x₁, φⁿ⁺¹ = φ with each X t̄ replaced by ∃ȳ(ȳ=t̄ ∧ ∃x̄(x̄=ȳ ∧ φⁿ(x̄))).
inline Formula unfold_stage_formula(const Formula& body, SymId X, const std::vector<SymId>& xs, std::size_t n) {
  detail::require_first_order(body, "unfolded body");
  if (xs.empty()) throw Error("relation variable needs positive arity");
  for (auto v : body->free_vars)
    if (std::find(xs.begin(), xs.end(), v) == xs.end())
      throw Error("free variable " + sym_name(v) + " is not among the fixed-point variables");
  std::set<SymId> avoid(body->all_vars.begin(), body->all_vars.end());
  avoid.insert(xs.begin(), xs.end());
  detail::FreshVars fresh(avoid, "v");
  auto ys = fresh.next(xs.size());
  Terms xt = var_terms(xs), yt = var_terms(ys);
  Formula cur = neg(eq(xt[0], xt[0]));
  for (std::size_t i = 0; i < n; ++i) {
    Formula inner = exists(xs, conj(eq(xt, yt), cur));
    cur = replace_relation(body, X, [&](const Terms& ts) {
      if (ts.size() != xs.size()) throw Error("relation " + sym_name(X) + " used with the wrong arity");
      return exists(ys, conj(eq(yt, ts), inner));
    });
  }
  return cur;
}

/// ⋁_{i=0}^{t} (∀x̄(φ^i(x̄) ↔ φ^{i+1}(x̄)) ∧ φ^i(t̄)); φ^i(t̄) is obtained by substitution.
inline Formula pfp_disjunction_sentence(const Formula& body, SymId X, const std::vector<SymId>& xs, const Terms& ts,
                                        std::size_t t) {
  if (ts.size() != xs.size()) throw Error("argument tuple length differs from the relation arity");
  std::vector<Formula> stage;
  for (std::size_t i = 0; i <= t + 1; ++i) stage.push_back(unfold_stage_formula(body, X, xs, i));
  Substitution at;
  for (std::size_t i = 0; i < xs.size(); ++i) at[xs[i]] = ts[i];
  std::vector<Formula> ds;
  for (std::size_t i = 0; i <= t; ++i)
    ds.push_back(conj(forall(xs, iff(stage[i], stage[i + 1])), substitute(stage[i], at)));
  Formula out = ds[0];
  for (std::size_t i = 1; i < ds.size(); ++i) out = disj(out, ds[i]);
  return out;
}

/// h(0)=0, h(i+1)=l+m(2+h(i)): binary connectives of φ^i for a body with l of them and m X-occurrences.
inline Count forall_count_h(Count l, Count m, std::size_t i) {
  Count h = 0;
  for (std::size_t j = 0; j < i; ++j) h = l + m * (2 + h);
  return h;
}

/// l+(l+2)m+…+(l+2)m^{i−1}+2m^i for i ≥ 1.
inline Count forall_count_h_closed(Count l, Count m, std::size_t i) {
  if (i == 0) return 0;
  Count sum = l, p = 1;
  for (std::size_t j = 1; j < i; ++j) {
    p *= m;
    sum += (l + 2) * p;
  }
  return sum + 2 * p * m;
}

/// Σ_{i=0}^{t}(4+2h(i)+h(i+1)).
inline Count pfp_disjunction_count(Count l, Count m, std::size_t t) {
  Count sum = 0;
  for (std::size_t i = 0; i <= t; ++i) sum += 4 + 2 * forall_count_h(l, m, i) + forall_count_h(l, m, i + 1);
  return sum;
}

// ---- interpretations ---------------------------------------------------------------

/// k-ary first-order query. The universe and constant formulas use the variables
/// x1..xk; a relation of arity a uses x1..x_{a·k}, argument i occupying x_{(i−1)k+1}..x_{ik}.
struct Interpretation {
  std::size_t k = 1;
  Formula universe;
  std::vector<std::pair<std::string, std::size_t>> relation_arities;
  std::map<std::string, Formula> relations;
  std::vector<std::string> constant_names;
  std::map<std::string, Formula> constants;
  bool target_builtins = false;

  Vocabulary target() const { return Vocabulary(relation_arities, constant_names, target_builtins); }
};

inline SymId interp_var(std::size_t i) { return intern("x" + std::to_string(i + 1)); }

inline std::vector<SymId> interp_vars(std::size_t count) {
  std::vector<SymId> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(interp_var(i));
  return out;
}

inline void validate_interpretation(const Interpretation& I) {
  if (I.k == 0) throw Error("interpretation width must be positive");
  auto check = [&](const Formula& f, std::size_t nvars, const std::string& what) {
    if (!f) throw Error("missing formula for " + what);
    auto vs = interp_vars(nvars);
    for (auto v : f->free_vars)
      if (std::find(vs.begin(), vs.end(), v) == vs.end())
        throw Error("formula for " + what + " has free variable " + sym_name(v) + " outside x1..x" + std::to_string(nvars));
  };
  check(I.universe, I.k, "the universe");
  for (auto& [r, a] : I.relation_arities) {
    auto it = I.relations.find(r);
    if (it == I.relations.end()) throw Error("missing formula for relation " + r);
    check(it->second, a * I.k, "relation " + r);
  }
  for (auto& c : I.constant_names) {
    auto it = I.constants.find(c);
    if (it == I.constants.end()) throw Error("missing formula for constant " + c);
    check(it->second, I.k, "constant " + c);
  }
}

/// I(A), universe re-indexed 0..|I(A)|−1 by tuple rank.
inline Structure apply_interpretation(const Interpretation& I, const Structure& A) {
  validate_interpretation(I);
  const std::size_t n = A.size(), k = I.k;
  Relation uni = define(A, I.universe, interp_vars(k));
  std::vector<std::size_t> ranks;
  std::map<std::size_t, Element> index;
  for (std::size_t r = 0; r < uni.capacity(); ++r)
    if (uni.contains_rank(r)) {
      index[r] = static_cast<Element>(ranks.size());
      ranks.push_back(r);
    }
  if (ranks.empty()) throw Error("interpretation defines an empty universe");
  const std::size_t m = ranks.size();
  Vocabulary tv = I.target();
  std::vector<Relation> rels;
  for (auto& [name, a] : I.relation_arities) {
    Relation big = define(A, I.relations.at(name), interp_vars(a * k));
    Relation out(a, m);
    std::size_t blk = checked_power(n, k);
    for (std::size_t r = 0; r < big.capacity(); ++r) {
      if (!big.contains_rank(r)) continue;
      Tuple t(a);
      bool ok = true;
      std::size_t x = r;
      for (std::size_t i = a; i-- > 0 && ok;) {
        auto it = index.find(x % blk);
        x /= blk;
        if (it == index.end()) ok = false;
        else t[i] = it->second;
      }
      if (ok) out.insert(t);
    }
    rels.push_back(std::move(out));
  }
  std::vector<Element> consts;
  for (auto& c : I.constant_names) {
    Relation sel = define(A, conj(I.universe, I.constants.at(c)), interp_vars(k));
    if (sel.count() != 1)
      throw Error("constant formula for " + c + " selects " + std::to_string(sel.count()) + " tuples, expected exactly one");
    consts.push_back(index.at(tuple_rank(sel.tuples()[0], n)));
  }
  return Structure::from_relations(tv, m, std::move(rels), std::move(consts));
}

namespace detail {

class DualMap {
public:
  DualMap(const Interpretation& I, const Formula& theta) : I_(I) {
    std::set<SymId> avoid(theta->all_vars.begin(), theta->all_vars.end());
    auto add = [&](const Formula& f) { avoid.insert(f->all_vars.begin(), f->all_vars.end()); };
    add(I.universe);
    for (auto& [_, f] : I.relations) add(f);
    for (auto& [_, f] : I.constants) add(f);
    for (std::size_t i = 0; i < 64; ++i) avoid.insert(interp_var(i));
    fresh_ = std::make_unique<FreshVars>(avoid, "w");
    tv_ = I.target();
  }

  const std::vector<SymId>& tuple(SymId v) {
    auto it = vars_.find(v);
    if (it != vars_.end()) return it->second;
    return vars_.emplace(v, fresh_->next(I_.k)).first->second;
  }

  Terms tuple_of(const Term& t) {
    if (t.is_var) return var_terms(tuple(t.id));
    return var_terms(constant_tuple(sym_name(t.id)));
  }

  const std::vector<SymId>& constant_tuple(const std::string& c) {
    auto it = consts_.find(c);
    if (it != consts_.end()) return it->second;
    if (!tv_.constant_index(c)) throw Error("constant " + c + " is not in the target vocabulary");
    order_.push_back(c);
    return consts_.emplace(c, fresh_->next(I_.k)).first->second;
  }

  Formula at(const Formula& f, const std::vector<Terms>& args) {
    Substitution s;
    std::size_t i = 0;
    for (const auto& ts : args)
      for (const auto& t : ts) s[interp_var(i++)] = t;
    return substitute(f, s);
  }

  Formula in_universe(const Terms& ts) { return at(I_.universe, {ts}); }

  Formula lex_less(const Terms& a, const Terms& b) {
    std::vector<Formula> ds;
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::vector<Formula> cs;
      for (std::size_t j = 0; j < i; ++j) cs.push_back(eq(a[j], b[j]));
      cs.push_back(rel("<", {a[i], b[i]}));
      ds.push_back(big_and(cs));
    }
    return big_or(ds);
  }

  Formula map(const Formula& f) {
    switch (f->kind) {
    case Kind::Eq: {
      Terms l, r;
      for (std::size_t i = 0; i < f->lhs.size(); ++i) {
        auto a = tuple_of(f->lhs[i]), b = tuple_of(f->rhs[i]);
        l.insert(l.end(), a.begin(), a.end());
        r.insert(r.end(), b.begin(), b.end());
      }
      return eq(l, r);
    }
    case Kind::Rel: {
      std::vector<Terms> args;
      for (const auto& t : f->lhs) args.push_back(tuple_of(t));
      if (relvars_.count(f->rel)) {
        Terms flat;
        for (auto& a : args) flat.insert(flat.end(), a.begin(), a.end());
        return rel(f->rel, flat);
      }
      const std::string name = sym_name(f->rel);
      auto idx = tv_.relation_index(name);
      if (!idx) throw Error("relation " + name + " is not in the target vocabulary");
      const auto& sym = tv_.relations()[*idx];
      if (!sym.builtin) return at(I_.relations.at(name), args);
      if (name == "<") return lex_less(args[0], args[1]);
      if (name == "SUC") {
        auto zs = fresh_->next(I_.k);
        Terms z = var_terms(zs);
        return conj(lex_less(args[0], args[1]),
                    neg(exists(zs, conj(in_universe(z), conj(lex_less(args[0], z), lex_less(z, args[1]))))));
      }
      throw Error("numeric relation " + name + " has no translation under the dual map");
    }
    case Kind::True:
    case Kind::False: return f;
    case Kind::Not: return neg(map(f->kids[0]));
    case Kind::Or:
    case Kind::And:
    case Kind::Implies:
    case Kind::Iff: return binary(f->kind, map(f->kids[0]), map(f->kids[1]));
    case Kind::Exists:
    case Kind::Forall: {
      auto vs = tuple(f->var);
      Terms vt = var_terms(vs);
      Formula body = map(f->kids[0]);
      if (f->kind == Kind::Exists) return exists(vs, conj(in_universe(vt), body));
      return forall(vs, implies(in_universe(vt), body));
    }
    case Kind::Fix: {
      relvars_.insert(f->rel);
      std::vector<SymId> bound;
      std::vector<Formula> guards;
      for (auto v : f->bound) {
        auto vs = tuple(v);
        bound.insert(bound.end(), vs.begin(), vs.end());
        guards.push_back(in_universe(var_terms(vs)));
      }
      Formula body = conj(big_and(guards), map(f->kids[0]));
      Terms args;
      for (const auto& t : f->args) {
        auto a = tuple_of(t);
        args.insert(args.end(), a.begin(), a.end());
      }
      return fix(f->op, f->rel, bound, body, args);
    }
    case Kind::Sim: {
      std::vector<SimComponent> comps;
      for (const auto& c : f->comps) relvars_.insert(c.rel);
      for (const auto& c : f->comps) {
        std::vector<SymId> bound;
        std::vector<Formula> guards;
        for (auto v : c.vars) {
          auto vs = tuple(v);
          bound.insert(bound.end(), vs.begin(), vs.end());
          guards.push_back(in_universe(var_terms(vs)));
        }
        comps.push_back({c.rel, bound, conj(big_and(guards), map(c.body))});
      }
      Terms args;
      for (const auto& t : f->args) {
        auto a = tuple_of(t);
        args.insert(args.end(), a.begin(), a.end());
      }
      return sim(f->op, std::move(comps), f->select, args);
    }
    }
    throw Error("unsupported formula node under the dual map");
  }

  /// Defining formula for a constant tuple z̄.
  Formula constant_definition(const std::string& c, const Terms& z) {
    if (I_.constants.count(c)) return conj(in_universe(z), at(I_.constants.at(c), {z}));
    auto fz = fresh_->next(I_.k);
    Terms w = var_terms(fz);
    if (c == "0") return conj(in_universe(z), neg(exists(fz, conj(in_universe(w), lex_less(w, z)))));
    if (c == "max") return conj(in_universe(z), neg(exists(fz, conj(in_universe(w), lex_less(z, w)))));
    if (c == "1") {
      // exactly one universe tuple below z
      auto gz = fresh_->next(I_.k);
      Terms g = var_terms(gz);
      Formula below = conj(in_universe(w), lex_less(w, z));
      Formula unique = forall(gz, implies(conj(in_universe(g), lex_less(g, z)), eq(g, w)));
      return conj(in_universe(z), exists(fz, conj(below, unique)));
    }
    throw Error("numeric constant " + c + " has no translation under the dual map");
  }

  Formula run(const Formula& theta) {
    Formula body = map(theta);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      const auto& zs = consts_.at(*it);
      body = exists(zs, conj(constant_definition(*it, var_terms(zs)), body));
    }
    return body;
  }

  const std::map<SymId, std::vector<SymId>>& variable_map() const { return vars_; }

private:
  const Interpretation& I_;
  Vocabulary tv_;
  std::unique_ptr<FreshVars> fresh_;
  std::map<SymId, std::vector<SymId>> vars_;
  std::map<std::string, std::vector<SymId>> consts_;
  std::vector<std::string> order_;
  std::set<SymId> relvars_;
};

} // namespace detail

struct DualResult {
  Formula formula;
  std::map<SymId, std::vector<SymId>> variables; // v ↦ v¹…vᵏ
};

/// Î(θ): the formula over the source vocabulary with A ⊨ Î(θ)[α] iff I(A) ⊨ θ[α′].
inline DualResult dual_formula_with_map(const Interpretation& I, const Formula& theta) {
  validate_interpretation(I);
  detail::DualMap dm(I, theta);
  for (auto v : theta->free_vars) dm.tuple(v);
  DualResult out;
  out.formula = dm.run(theta);
  out.variables = dm.variable_map();
  return out;
}

inline Formula dual_formula(const Interpretation& I, const Formula& theta) { return dual_formula_with_map(I, theta).formula; }

} // namespace fmw
