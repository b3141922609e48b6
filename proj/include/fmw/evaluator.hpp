#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/formula.hpp"
#include "fmw/relation.hpp"
#include "fmw/structure.hpp"

namespace fmw {

/// Values for free first-order variables and free relation variables.
struct Assignment {
  std::map<SymId, Element> vars;
  std::map<SymId, Relation> rels;

  Assignment& set(const std::string& v, Element e) {
    vars[intern(v)] = e;
    return *this;
  }
  Assignment& set_relation(const std::string& r, Relation rel) {
    rels[intern(r)] = std::move(rel);
    return *this;
  }
};

/// FixedPointAt(depth) when fixed, otherwise NoFixedPoint(cycle_start, cycle_length).
struct Verdict {
  bool fixed = true;
  std::size_t depth = 0;
  std::size_t cycle_start = 0;
  std::size_t cycle_length = 0;
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

inline std::string to_string(const Verdict& v) {
  if (v.fixed) return "FixedPointAt(" + std::to_string(v.depth) + ")";
  return "NoFixedPoint(" + std::to_string(v.cycle_start) + "," + std::to_string(v.cycle_length) + ")";
}

/// Stages F_0 = empty, F_1, ... up to the verdict index.
struct StageTrace {
  std::vector<Relation> stages;
  Verdict verdict;
  /// Value of the fixed point, empty when none exists.
  Relation result() const {
    if (verdict.fixed) return stages.back();
    return Relation(stages.front().arity(), stages.front().universe_size());
  }
};

struct SimComponentSpec {
  SymId rel;
  std::vector<SymId> vars;
  Formula body;
};

struct SimResult {
  std::vector<std::vector<Relation>> stages; // stages[i][j]: component j at stage i
  Verdict verdict;
  std::vector<Relation> relations;           // fixed point (all empty if none)
  bool exists() const { return verdict.fixed; }
  std::size_t iterations() const { return verdict.depth; }
};

struct FixSpec {
  SymId rel;
  std::vector<SymId> vars;
  Formula body;
};

struct NestedStep {
  Relation outer;     // outer relation value the inner run was computed for
  StageTrace inner;
};

struct NestedCostReport {
  std::vector<NestedStep> outer_steps;
  std::size_t total_inner_iterations = 0;
  Verdict outer_verdict;
  Relation result;
  bool inflationary_outer = false;
  std::string convention = "restart-inner-from-empty; count inner depths over all outer evaluations including the confirming one";
};

namespace detail {

class Evaluator {
public:
  Evaluator(const Structure& a, const Assignment& alpha) : a_(a), n_(a.size()) {
    const std::size_t nsym = SymbolTable::instance().size() + 1;
    env_.assign(nsym, -1);
    rel_stack_.resize(nsym);
    struct_rel_.assign(nsym, nullptr);
    const_val_.assign(nsym, -1);
    for (std::size_t i = 0; i < a.vocab().relations().size(); ++i)
      struct_rel_[static_cast<std::size_t>(intern(a.vocab().relations()[i].name))] = &a.relations()[i];
    for (std::size_t i = 0; i < a.vocab().constants().size(); ++i)
      const_val_[static_cast<std::size_t>(intern(a.vocab().constants()[i].name))] = a.constant_values()[i];
    for (auto& [v, e] : alpha.vars) {
      if (e < 0 || static_cast<std::size_t>(e) >= n_)
        throw Error("assignment value " + std::to_string(e) + " for " + sym_name(v) + " out of range");
      grow(v);
      env_[static_cast<std::size_t>(v)] = e;
    }
    for (auto& [r, rel] : alpha.rels) {
      if (rel.universe_size() != n_) throw Error("relation variable " + sym_name(r) + " has the wrong universe size");
      grow(r);
      rel_stack_[static_cast<std::size_t>(r)].push_back(&rel);
      shadowable_.insert(r);
    }
  }

  std::size_t n() const { return n_; }

  /// Must be called for every formula before evaluation: collects relation binders
  /// and checks that free variables are bound.
  void prepare(const Formula& f, const std::vector<SymId>& extra_bound_vars = {},
               const std::vector<SymId>& extra_rel_vars = {}) {
    for (auto r : extra_rel_vars) {
      grow(r);
      shadowable_.insert(r);
    }
    std::set<const Node*> seen;
    std::vector<const Node*> stack{f.get()};
    while (!stack.empty()) {
      const Node* n = stack.back();
      stack.pop_back();
      if (!seen.insert(n).second) continue;
      if (n->kind == Kind::Fix) shadowable_.insert(n->rel);
      for (const auto& c : n->comps) shadowable_.insert(c.rel);
      for (auto v : n->all_vars) grow(v);
      for (auto r : n->free_rels) grow(r);
      if (n->kind == Kind::Fix) grow(n->rel);
      for (const auto& c : n->comps) grow(c.rel);
      for (const auto& k : n->kids) stack.push_back(k.get());
      for (const auto& c : n->comps) stack.push_back(c.body.get());
      auto check_terms = [&](const Terms& ts) {
        for (const auto& t : ts) {
          if (!t.is_var) {
            grow(t.id);
            if (const_val_[static_cast<std::size_t>(t.id)] < 0)
              throw Error("constant '" + sym_name(t.id) + "' is not interpreted in the structure");
          }
        }
      };
      check_terms(n->lhs);
      check_terms(n->rhs);
      check_terms(n->args);
    }
    memo_ok_.clear();
    for (auto v : f->free_vars) {
      if (env_[static_cast<std::size_t>(v)] >= 0) continue;
      if (std::find(extra_bound_vars.begin(), extra_bound_vars.end(), v) != extra_bound_vars.end()) continue;
      throw Error("unbound free variable " + sym_name(v));
    }
  }

  bool eval(const Formula& f) { return eval(f.get()); }

  void set_var(SymId v, Element e) { env_[static_cast<std::size_t>(v)] = e; }
  Element get_var(SymId v) const { return env_[static_cast<std::size_t>(v)]; }
  void push_rel(SymId r, const Relation* rel) { rel_stack_[static_cast<std::size_t>(r)].push_back(rel); }
  void pop_rel(SymId r) { rel_stack_[static_cast<std::size_t>(r)].pop_back(); }

  /// {ā : body[ā]} for the current relation environment.
  Relation apply(const Node* body, const std::vector<SymId>& vars) {
    Relation out(vars.size(), n_);
    std::vector<Element> saved;
    for (auto v : vars) saved.push_back(get_var(v));
    Tuple t(vars.size(), 0);
    for (std::size_t rank = 0; rank < out.capacity(); ++rank) {
      for (std::size_t i = 0; i < vars.size(); ++i) set_var(vars[i], t[i]);
      if (eval(body)) out.set_rank(rank);
      for (std::size_t i = vars.size(); i-- > 0;) {
        if (static_cast<std::size_t>(++t[i]) < n_) break;
        t[i] = 0;
      }
    }
    for (std::size_t i = 0; i < vars.size(); ++i) set_var(vars[i], saved[i]);
    return out;
  }

  /// Iterates F from the empty relation; inflationary adds the previous stage.
  StageTrace iterate(const Node* body, SymId r, const std::vector<SymId>& vars, bool inflationary,
                     const Relation* start = nullptr) {
    StageTrace tr;
    tr.stages.push_back(start ? *start : Relation(vars.size(), n_));
    std::unordered_map<Relation, std::size_t, RelationHash> seen;
    seen.emplace(tr.stages.back(), 0);
    for (;;) {
      const Relation& cur = tr.stages.back();
      push_rel(r, &cur);
      Relation next = apply(body, vars);
      pop_rel(r);
      if (inflationary) next |= cur;
      if (next == cur) {
        tr.verdict = {true, tr.stages.size() - 1, 0, 0};
        return tr;
      }
      auto it = seen.find(next);
      if (it != seen.end()) {
        tr.verdict = {false, 0, it->second, tr.stages.size() - it->second};
        return tr;
      }
      seen.emplace(next, tr.stages.size());
      tr.stages.push_back(std::move(next));
    }
  }

  SimResult iterate_sim(const std::vector<SimComponentSpec>& comps, bool inflationary) {
    SimResult res;
    std::vector<Relation> cur;
    for (const auto& c : comps) cur.push_back(Relation(c.vars.size(), n_));
    res.stages.push_back(cur);
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> seen; // hash bucket -> stage indices
    auto key = [](const std::vector<Relation>& rs) {
      std::vector<std::size_t> k;
      for (const auto& r : rs) k.push_back(r.hash());
      return k;
    };
    seen[key(cur)].push_back(0);
    for (;;) {
      const auto& now = res.stages.back();
      for (std::size_t i = 0; i < comps.size(); ++i) push_rel(comps[i].rel, &now[i]);
      std::vector<Relation> next;
      for (const auto& c : comps) next.push_back(apply(c.body.get(), c.vars));
      for (std::size_t i = comps.size(); i-- > 0;) pop_rel(comps[i].rel);
      if (inflationary)
        for (std::size_t i = 0; i < comps.size(); ++i) next[i] |= now[i];
      if (next == now) {
        res.verdict = {true, res.stages.size() - 1, 0, 0};
        res.relations = now;
        return res;
      }
      auto& bucket = seen[key(next)];
      for (auto idx : bucket) {
        if (res.stages[idx] == next) {
          res.verdict = {false, 0, idx, res.stages.size() - idx};
          for (const auto& c : comps) res.relations.push_back(Relation(c.vars.size(), n_));
          return res;
        }
      }
      bucket.push_back(res.stages.size());
      res.stages.push_back(std::move(next));
    }
  }

private:
  void grow(SymId id) {
    auto need = static_cast<std::size_t>(id) + 1;
    if (env_.size() < need) {
      env_.resize(need, -1);
      rel_stack_.resize(need);
      struct_rel_.resize(need, nullptr);
      const_val_.resize(need, -1);
    }
  }

  Element term_value(const Term& t) const {
    return t.is_var ? env_[static_cast<std::size_t>(t.id)] : const_val_[static_cast<std::size_t>(t.id)];
  }

  const Relation* lookup_rel(SymId r) const {
    const auto& st = rel_stack_[static_cast<std::size_t>(r)];
    if (!st.empty()) return st.back();
    const Relation* s = struct_rel_[static_cast<std::size_t>(r)];
    if (!s) throw Error("relation '" + sym_name(r) + "' is neither in the structure nor bound");
    return s;
  }

  // ---- memoization of closed-over-structure quantifier subformulas ----
  struct Memo {
    bool eligible = false;
    std::unordered_map<std::uint64_t, char> table;
  };

  Memo& memo_for(const Node* n) {
    auto [it, fresh] = memo_ok_.try_emplace(n);
    if (fresh) {
      bool ok = n->fixpoint_free;
      for (auto r : n->free_rels)
        if (shadowable_.count(r) || !struct_rel_[static_cast<std::size_t>(r)]) ok = false;
      long double space = 1;
      for (std::size_t i = 0; i < n->free_vars.size(); ++i) space *= static_cast<long double>(n_);
      if (space > 1.0e18L) ok = false;
      it->second.eligible = ok;
    }
    return it->second;
  }

  std::uint64_t memo_key(const Node* n) const {
    std::uint64_t k = 0;
    for (auto v : n->free_vars) k = k * n_ + static_cast<std::uint64_t>(env_[static_cast<std::size_t>(v)]);
    return k;
  }

  // ---- guarded quantifier chains: Q V (G -> B) / Q V (G & B) ----
  struct GuardPlan {
    bool usable = false;
    std::vector<SymId> vars;
    const Node* inner = nullptr; // the implication / conjunction node
    std::vector<std::vector<std::pair<SymId, Term>>> disjuncts;
  };

  static bool dnf(const Node* g, std::vector<std::vector<const Node*>>& out, std::size_t cap) {
    if (g->kind == Kind::Or) {
      std::vector<std::vector<const Node*>> l, r;
      if (!dnf(g->kids[0].get(), l, cap) || !dnf(g->kids[1].get(), r, cap)) return false;
      out = std::move(l);
      out.insert(out.end(), r.begin(), r.end());
      return out.size() <= cap;
    }
    if (g->kind == Kind::And) {
      std::vector<std::vector<const Node*>> l, r;
      if (!dnf(g->kids[0].get(), l, cap) || !dnf(g->kids[1].get(), r, cap)) return false;
      if (l.size() * r.size() > cap) return false;
      out.clear();
      for (auto& a : l)
        for (auto& b : r) {
          auto c = a;
          c.insert(c.end(), b.begin(), b.end());
          out.push_back(std::move(c));
        }
      return true;
    }
    out = {{g}};
    return true;
  }

  const GuardPlan& plan_for(const Node* q) {
    auto [it, fresh] = plans_.try_emplace(q);
    if (!fresh) return it->second;
    GuardPlan& p = it->second;
    const Node* cur = q;
    while (cur->kind == q->kind) {
      p.vars.push_back(cur->var);
      cur = cur->kids[0].get();
    }
    Kind want = q->kind == Kind::Forall ? Kind::Implies : Kind::And;
    if (cur->kind != want) return p;
    if (std::set<SymId>(p.vars.begin(), p.vars.end()).size() != p.vars.size()) return p;
    std::vector<std::vector<const Node*>> ds;
    if (!dnf(cur->kids[0].get(), ds, 256)) return p;
    std::set<SymId> vs(p.vars.begin(), p.vars.end());
    for (const auto& d : ds) {
      std::map<SymId, Term> pins;
      for (const Node* atom : d) {
        if (atom->kind != Kind::Eq) continue;
        for (std::size_t i = 0; i < atom->lhs.size(); ++i) {
          const Term &l = atom->lhs[i], &r = atom->rhs[i];
          auto pinnable = [&](const Term& other) { return !other.is_var || !vs.count(other.id); };
          if (l.is_var && vs.count(l.id) && pinnable(r)) pins.emplace(l.id, r);
          else if (r.is_var && vs.count(r.id) && pinnable(l)) pins.emplace(r.id, l);
        }
      }
      if (pins.size() != vs.size()) return p;
      p.disjuncts.push_back({pins.begin(), pins.end()});
    }
    p.inner = cur;
    p.usable = true;
    return p;
  }

  bool eval_quant(const Node* f) {
    const GuardPlan& plan = plan_for(f);
    const bool universal = f->kind == Kind::Forall;
    if (plan.usable) {
      std::vector<Element> saved;
      for (auto v : plan.vars) saved.push_back(get_var(v));
      bool result = universal;
      for (const auto& d : plan.disjuncts) {
        std::vector<Element> vals;
        for (const auto& [v, t] : d) vals.push_back(term_value(t));
        for (std::size_t i = 0; i < d.size(); ++i) set_var(d[i].first, vals[i]);
        bool b = eval(plan.inner);
        if (b != universal) {
          result = !universal;
          break;
        }
      }
      for (std::size_t i = 0; i < plan.vars.size(); ++i) set_var(plan.vars[i], saved[i]);
      return result;
    }
    const Node* body = f->kids[0].get();
    Element saved = get_var(f->var);
    bool result = universal;
    for (std::size_t e = 0; e < n_; ++e) {
      set_var(f->var, static_cast<Element>(e));
      if (eval(body) != universal) {
        result = !universal;
        break;
      }
    }
    set_var(f->var, saved);
    return result;
  }

  // ---- fixed points inside formulas ----
  struct FixCache {
    bool eligible = false;
    std::vector<SymId> params;
    std::unordered_map<std::uint64_t, std::vector<Relation>> table;
  };

  FixCache& fix_cache_for(const Node* f) {
    auto [it, fresh] = fix_cache_.try_emplace(f);
    if (fresh) {
      bool ok = true;
      for (auto r : f->free_rels)
        if (shadowable_.count(r)) ok = false;
      std::vector<SymId> params;
      if (f->kind == Kind::Fix) {
        params = sorted_minus(f->kids[0]->free_vars, f->bound);
      } else {
        for (const auto& c : f->comps) params = sorted_union(params, sorted_minus(c.body->free_vars, c.vars));
      }
      long double space = 1;
      for (std::size_t i = 0; i < params.size(); ++i) space *= static_cast<long double>(n_);
      if (space > 1.0e18L) ok = false;
      it->second.eligible = ok;
      it->second.params = params;
    }
    return it->second;
  }

  std::vector<Relation> fix_value(const Node* f) {
    FixCache& cache = fix_cache_for(f);
    std::uint64_t key = 0;
    if (cache.eligible) {
      for (auto v : cache.params) key = key * n_ + static_cast<std::uint64_t>(env_[static_cast<std::size_t>(v)]);
      if (auto it = cache.table.find(key); it != cache.table.end()) return it->second;
    }
    std::vector<Relation> val;
    if (f->kind == Kind::Fix) {
      StageTrace tr = iterate(f->kids[0].get(), f->rel, f->bound, f->op == FixOp::IFP);
      val.push_back(tr.result());
    } else {
      std::vector<SimComponentSpec> comps;
      for (const auto& c : f->comps) comps.push_back({c.rel, c.vars, c.body});
      val = iterate_sim(comps, f->op == FixOp::IFP).relations;
    }
    if (cache.eligible) cache.table.emplace(key, val);
    return val;
  }

  bool eval(const Node* f) {
    switch (f->kind) {
    case Kind::Eq:
      for (std::size_t i = 0; i < f->lhs.size(); ++i)
        if (term_value(f->lhs[i]) != term_value(f->rhs[i])) return false;
      return true;
    case Kind::Rel: {
      const Relation* r = lookup_rel(f->rel);
      if (r->arity() != f->lhs.size())
        throw Error("relation '" + sym_name(f->rel) + "' has arity " + std::to_string(r->arity()) + ", applied to " +
                    std::to_string(f->lhs.size()) + " terms");
      std::size_t rank = 0;
      for (const auto& t : f->lhs) rank = rank * n_ + static_cast<std::size_t>(term_value(t));
      return r->contains_rank(rank);
    }
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Not: return !eval(f->kids[0].get());
    case Kind::Or: return eval(f->kids[0].get()) || eval(f->kids[1].get());
    case Kind::And: return eval(f->kids[0].get()) && eval(f->kids[1].get());
    case Kind::Implies: return !eval(f->kids[0].get()) || eval(f->kids[1].get());
    case Kind::Iff: return eval(f->kids[0].get()) == eval(f->kids[1].get());
    case Kind::Exists:
    case Kind::Forall: {
      Memo& m = memo_for(f);
      if (!m.eligible) return eval_quant(f);
      std::uint64_t key = memo_key(f);
      if (auto it = m.table.find(key); it != m.table.end()) return it->second != 0;
      bool v = eval_quant(f);
      if (memo_entries_ < kMemoLimit) {
        m.table.emplace(key, v ? 1 : 0);
        ++memo_entries_;
      }
      return v;
    }
    case Kind::Fix:
    case Kind::Sim: {
      auto vals = fix_value(f);
      const Relation& r = f->kind == Kind::Fix ? vals[0] : vals[f->select];
      std::size_t rank = 0;
      for (const auto& t : f->args) rank = rank * n_ + static_cast<std::size_t>(term_value(t));
      return r.contains_rank(rank);
    }
    }
    return false;
  }

  static constexpr std::size_t kMemoLimit = 8'000'000;

  const Structure& a_;
  std::size_t n_;
  std::vector<Element> env_;
  std::vector<std::vector<const Relation*>> rel_stack_;
  std::vector<const Relation*> struct_rel_;
  std::vector<Element> const_val_;
  std::set<SymId> shadowable_;
  std::unordered_map<const Node*, Memo> memo_ok_;
  std::size_t memo_entries_ = 0;
  std::unordered_map<const Node*, GuardPlan> plans_;
  std::unordered_map<const Node*, FixCache> fix_cache_;
};

inline void check_body_vars(const Formula& body, const std::vector<SymId>& vars, const Assignment& alpha) {
  if (std::set<SymId>(vars.begin(), vars.end()).size() != vars.size())
    throw Error("bound variables of a fixed point must be distinct");
  for (auto v : body->free_vars)
    if (!alpha.vars.count(v) && std::find(vars.begin(), vars.end(), v) == vars.end())
      throw Error("unbound free variable " + sym_name(v));
}

} // namespace detail

inline bool satisfies(const Structure& a, const Formula& f, const Assignment& alpha = {}) {
  detail::Evaluator ev(a, alpha);
  ev.prepare(f);
  return ev.eval(f);
}

/// The relation {ā : A ⊨ f[ā]} over the given variables.
inline Relation define(const Structure& a, const Formula& f, const std::vector<SymId>& vars, const Assignment& alpha = {}) {
  detail::check_body_vars(f, vars, alpha);
  detail::Evaluator ev(a, alpha);
  ev.prepare(f, vars);
  return ev.apply(f.get(), vars);
}

inline StageTrace stages(const Structure& a, const Formula& body, SymId r, const std::vector<SymId>& vars,
                         const Assignment& alpha = {}, bool inflationary = false) {
  detail::check_body_vars(body, vars, alpha);
  detail::Evaluator ev(a, alpha);
  ev.prepare(body, vars, {r});
  return ev.iterate(body.get(), r, vars, inflationary);
}

/// Depth of the body on A; nullopt stands for infinity (no fixed point).
inline std::optional<std::size_t> depth(const Structure& a, const Formula& body, SymId r,
                                        const std::vector<SymId>& vars, const Assignment& alpha = {}) {
  auto tr = stages(a, body, r, vars, alpha);
  if (!tr.verdict.fixed) return std::nullopt;
  return tr.verdict.depth;
}

/// Depth of (R x̄ | body).
inline std::size_t inflationary_depth(const Structure& a, const Formula& body, SymId r, const std::vector<SymId>& vars,
                                      const Assignment& alpha = {}) {
  return stages(a, body, r, vars, alpha, true).verdict.depth;
}

inline std::string depth_string(const std::optional<std::size_t>& d) { return d ? std::to_string(*d) : "inf"; }

/// Maximum depth over all structures of size n; nullopt when some structure has none.
inline std::optional<std::size_t> depth_over_size(const Formula& body, SymId r, const std::vector<SymId>& vars,
                                                  const Vocabulary& vocab, std::size_t n, std::uint64_t limit) {
  for (auto v : body->free_vars)
    if (std::find(vars.begin(), vars.end(), v) == vars.end())
      throw Error("body has free variable " + sym_name(v) + " outside the bound tuple");
  std::optional<std::size_t> best = 0;
  bool infinite = false;
  for_each_structure(vocab, n, limit, [&](const Structure& s) {
    if (infinite) return;
    auto d = depth(s, body, r, vars);
    if (!d) infinite = true;
    else best = std::max(*best, *d);
  });
  if (infinite) return std::nullopt;
  return best;
}

inline SimResult simultaneous_fixpoint(const Structure& a, const std::vector<SimComponentSpec>& comps,
                                       const Assignment& alpha = {}, bool inflationary = false) {
  detail::Evaluator ev(a, alpha);
  std::vector<SymId> rels;
  for (const auto& c : comps) rels.push_back(c.rel);
  for (const auto& c : comps) {
    detail::check_body_vars(c.body, c.vars, alpha);
    ev.prepare(c.body, c.vars, rels);
  }
  return ev.iterate_sim(comps, inflationary);
}

/// Outer iteration whose body sees the inner fixed point computed afresh (from the
/// empty relation) for every outer value, including the confirming evaluation.
inline NestedCostReport nested_fixpoint(const Structure& a, const FixSpec& outer, const FixSpec& inner,
                                        const Assignment& alpha = {}, bool inflationary_outer = false) {
  detail::check_body_vars(outer.body, outer.vars, alpha);
  detail::check_body_vars(inner.body, inner.vars, alpha);
  detail::Evaluator ev(a, alpha);
  ev.prepare(outer.body, outer.vars, {outer.rel, inner.rel});
  ev.prepare(inner.body, inner.vars, {outer.rel, inner.rel});
  NestedCostReport rep;
  rep.inflationary_outer = inflationary_outer;
  std::vector<Relation> xs{Relation(outer.vars.size(), a.size())};
  std::unordered_map<Relation, std::size_t, RelationHash> seen{{xs[0], 0}};
  for (;;) {
    const Relation x = xs.back();
    ev.push_rel(outer.rel, &x);
    StageTrace tr = ev.iterate(inner.body.get(), inner.rel, inner.vars, false);
    Relation y = tr.result();
    ev.push_rel(inner.rel, &y);
    Relation next = ev.apply(outer.body.get(), outer.vars);
    ev.pop_rel(inner.rel);
    ev.pop_rel(outer.rel);
    if (inflationary_outer) next |= x;
    rep.total_inner_iterations += tr.verdict.fixed ? tr.verdict.depth : tr.stages.size();
    rep.outer_steps.push_back({x, std::move(tr)});
    if (next == x) {
      rep.outer_verdict = {true, xs.size() - 1, 0, 0};
      rep.result = x;
      return rep;
    }
    if (auto it = seen.find(next); it != seen.end()) {
      rep.outer_verdict = {false, 0, it->second, xs.size() - it->second};
      rep.result = Relation(outer.vars.size(), a.size());
      return rep;
    }
    seen.emplace(next, xs.size());
    xs.push_back(std::move(next));
  }
}

} // namespace fmw
