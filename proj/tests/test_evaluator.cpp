#include <gtest/gtest.h>

#include "fmw/evaluator.hpp"
#include "fmw/json_io.hpp"
#include "fmw/parser.hpp"
#include "oracles.hpp"

using namespace fmw;

namespace {

Formula corpus(const std::string& name) { return parse(read_file(std::string(FMW_CORPUS_DIR) + "/" + name)); }

struct Fix {
  Formula body;
  SymId rel;
  std::vector<SymId> vars;
};
Fix fix_of(const Formula& f) { return {f->kids[0], f->rel, f->bound}; }

std::vector<SimComponentSpec> comps_of(const Formula& f) {
  std::vector<SimComponentSpec> out;
  for (const auto& c : f->comps) out.push_back({c.rel, c.vars, c.body});
  return out;
}

} // namespace

TEST(Evaluator, FirstOrderBasics) {
  auto A = linear_order(4);
  EXPECT_TRUE(satisfies(A, parse("A x . E y . x<y | A z . !(x<z)")));
  EXPECT_FALSE(satisfies(A, parse("E x . A y . y<x")));
  Assignment a;
  a.set("x", 1).set("y", 3);
  EXPECT_TRUE(satisfies(A, parse("x<y & !(y<x)"), a));
  EXPECT_THROW(satisfies(A, parse("x<y")), Error);
}

TEST(Evaluator, UnknownSymbolsRejected) {
  EXPECT_THROW(satisfies(linear_order(3), parse("E x . P(x)")), Error);
  EXPECT_THROW(satisfies(linear_order(3), parse("E x . x=max")), Error);
}

TEST(Evaluator, DefineRelation) {
  auto r = define(path_graph(4), parse("E(x,y) | E(y,x)"), {intern("x"), intern("y")});
  EXPECT_EQ(r.count(), 6u);
}

class CorpusDepth : public ::testing::TestWithParam<std::size_t> {};

TEST_P(CorpusDepth, PfpQuadratic) {
  std::size_t n = GetParam();
  auto f = fix_of(corpus("pfp-quadratic.fol"));
  auto A = builtin_structure(n);
  auto tr = stages(A, f.body, f.rel, f.vars);
  EXPECT_EQ(depth(A, f.body, f.rel, f.vars), n * (n + 1) / 2) << to_string(tr.verdict);
  EXPECT_EQ(inflationary_depth(A, f.body, f.rel, f.vars), 2u);
}

TEST_P(CorpusDepth, PfpThreePhase) {
  std::size_t n = GetParam();
  auto f = fix_of(corpus("pfp-three-phase.fol"));
  auto A = builtin_structure(n);
  EXPECT_EQ(depth(A, f.body, f.rel, f.vars), 2u);
  EXPECT_EQ(inflationary_depth(A, f.body, f.rel, f.vars), n);
}

TEST_P(CorpusDepth, SimLfpCounters) {
  std::size_t n = GetParam();
  auto f = corpus("sim-lfp-counters.fol");
  auto A = builtin_structure(n);
  auto cs = comps_of(f);
  EXPECT_EQ(simultaneous_fixpoint(A, cs).iterations(), n);
  auto rep = nested_fixpoint(A, {cs[0].rel, cs[0].vars, cs[0].body}, {cs[1].rel, cs[1].vars, cs[1].body});
  EXPECT_EQ(rep.total_inner_iterations, n * (n + 1));
}

TEST_P(CorpusDepth, SimPfpNested) {
  std::size_t n = GetParam();
  auto f = corpus("sim-pfp-nested.fol");
  auto A = builtin_structure(n);
  auto cs = comps_of(f);
  EXPECT_EQ(simultaneous_fixpoint(A, cs).iterations(), 2 * n - 2);
  auto rep = nested_fixpoint(A, {cs[0].rel, cs[0].vars, cs[0].body}, {cs[1].rel, cs[1].vars, cs[1].body});
  std::vector<std::size_t> inner;
  for (const auto& s : rep.outer_steps) inner.push_back(s.inner.verdict.depth);
  EXPECT_EQ(inner, (std::vector<std::size_t>{2, 1, 1}));
  EXPECT_EQ(rep.total_inner_iterations, 4u);
}

TEST_P(CorpusDepth, SimPfpToggle) {
  std::size_t n = GetParam();
  auto f = corpus("sim-pfp-toggle.fol");
  auto A = builtin_structure(n);
  auto cs = comps_of(f);
  EXPECT_EQ(simultaneous_fixpoint(A, cs).iterations(), n);
  // Y is the outer relation here.
  std::size_t yi = sym_name(cs[0].rel) == "Y" ? 0 : 1;
  auto rep = nested_fixpoint(A, {cs[yi].rel, cs[yi].vars, cs[yi].body}, {cs[1 - yi].rel, cs[1 - yi].vars, cs[1 - yi].body});
  ASSERT_FALSE(rep.outer_steps.empty());
  EXPECT_EQ(rep.outer_steps[0].inner.verdict.depth, 2u);
}

TEST_P(CorpusDepth, SimPfpMutual) {
  std::size_t n = GetParam();
  auto f = corpus("sim-pfp-mutual.fol");
  EXPECT_EQ(simultaneous_fixpoint(builtin_structure(n), comps_of(f)).iterations(), n);
}

INSTANTIATE_TEST_SUITE_P(Sizes3To8, CorpusDepth, ::testing::Range<std::size_t>(3, 9));

TEST(Evaluator, OscillatorHasNoFixedPoint) {
  auto f = fix_of(corpus("oscillator.fol"));
  auto tr = stages(builtin_structure(3), f.body, f.rel, f.vars);
  EXPECT_FALSE(tr.verdict.fixed);
  EXPECT_EQ(tr.verdict.cycle_start, 0u);
  EXPECT_EQ(tr.verdict.cycle_length, 2u);
  EXPECT_EQ(depth(builtin_structure(3), f.body, f.rel, f.vars), std::nullopt);
  EXPECT_TRUE(tr.result().empty());
  EXPECT_FALSE(satisfies(builtin_structure(3), corpus("oscillator.fol"), Assignment().set("x", 0)));
}

TEST(Evaluator, TransitiveClosureDepthOnPaths) {
  auto f = fix_of(corpus("tc.fol"));
  for (std::size_t n = 3; n <= 10; ++n) EXPECT_EQ(depth(path_graph(n), f.body, f.rel, f.vars), n - 1) << n;
}

TEST(Evaluator, DoublingDepthOnPaths) {
  auto f = fix_of(corpus("tc_doubling.fol"));
  for (std::size_t n = 3; n <= 10; ++n)
    EXPECT_EQ(depth(path_graph(n), f.body, f.rel, f.vars), oracle::clog2(n - 1) + 1) << n;
}

TEST(EvaluatorProperty, TransitiveClosureMatchesWarshall) {
  oracle::Rng rng(21);
  auto tc = corpus("tc.fol");
  auto dbl = corpus("tc_doubling.fol");
  Vocabulary v({{"E", 2}}, {});
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 1 + trial % 6;
    auto A = oracle::random_structure(v, n, rng, 0.3);
    auto c = oracle::closure(A);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Assignment a;
        a.set("x", Element(i)).set("y", Element(j));
        ASSERT_EQ(satisfies(A, tc, a), bool(c[i][j]));
        ASSERT_EQ(satisfies(A, dbl, a), bool(c[i][j]));
      }
  }
}

TEST(EvaluatorProperty, StagesOfPositiveBodiesIncrease) {
  oracle::Rng rng(4);
  oracle::FormulaGen gen{rng};
  gen.relvar = "R";
  Vocabulary v({{"E", 2}}, {});
  for (int trial = 0; trial < 300; ++trial) {
    auto body = parse(gen.formula(3, {"x"}));
    auto A = oracle::random_structure(v, 3, rng);
    auto tr = stages(A, body, intern("R"), {intern("x")});
    ASSERT_TRUE(tr.verdict.fixed);
    for (std::size_t i = 1; i < tr.stages.size(); ++i) ASSERT_TRUE(tr.stages[i - 1].subset_of(tr.stages[i]));
  }
}

/// LFP, IFP and PFP agree on R-positive bodies; exhaustive over all digraphs with ≤ 3 nodes.
TEST(EvaluatorProperty, LfpIfpPfpAgreeOnPositiveBodies) {
  oracle::Rng rng(12);
  oracle::FormulaGen gen{rng};
  gen.relvar = "R";
  Vocabulary v({{"E", 2}}, {});
  std::vector<std::vector<Structure>> all;
  for (std::size_t n = 1; n <= 3; ++n) all.push_back(enumerate_structures(v, n, 1 << 10));
  std::size_t cases = 0;
  for (int trial = 0; trial < 24; ++trial) {
    std::string body = gen.formula(3, {"x"});
    auto l = parse("[lfp R(x): " + body + "](x)");
    auto i = parse("[ifp R(x): " + body + "](x)");
    auto p = parse("[pfp R(x): " + body + "](x)");
    for (const auto& group : all)
      for (const auto& A : group)
        for (std::size_t e = 0; e < A.size(); ++e) {
          Assignment a;
          a.set("x", Element(e));
          bool lv = satisfies(A, l, a);
          ASSERT_EQ(lv, satisfies(A, i, a)) << body;
          ASSERT_EQ(lv, satisfies(A, p, a)) << body;
          ++cases;
        }
  }
  EXPECT_GE(cases, 10000u);
}

TEST(Evaluator, DepthOverSize) {
  auto f = fix_of(corpus("tc.fol"));
  auto d = depth_over_size(f.body, f.rel, f.vars, Vocabulary({{"E", 2}}, {}), 3, 1 << 10);
  ASSERT_TRUE(d);
  std::size_t brute = 0;
  for (const auto& A : enumerate_structures(Vocabulary({{"E", 2}}, {}), 3, 1 << 10))
    brute = std::max(brute, *depth(A, f.body, f.rel, f.vars));
  EXPECT_EQ(*d, brute);
  EXPECT_THROW(depth_over_size(f.body, f.rel, f.vars, Vocabulary({{"E", 2}}, {}), 4, 100), BoundExceeded);
}

TEST(Evaluator, PfpOfNonMonotoneBodyCanConverge) {
  // Flip-flop that settles: stage 1 = {0}, stage 2 = {0}.
  auto f = parse("[pfp R(x): x=0 | (R(x) & !R(x))](x)");
  auto tr = stages(builtin_structure(3), f->kids[0], f->rel, f->bound);
  EXPECT_TRUE(tr.verdict.fixed);
  EXPECT_EQ(tr.verdict.depth, 1u);
}

TEST(Evaluator, TraceJsonRoundTrip) {
  auto f = fix_of(corpus("pfp-quadratic.fol"));
  auto tr = stages(builtin_structure(4), f.body, f.rel, f.vars);
  auto back = trace_from_json(trace_to_json(tr), f.vars.size(), 4);
  EXPECT_EQ(back.stages, tr.stages);
  EXPECT_EQ(back.verdict, tr.verdict);
}
