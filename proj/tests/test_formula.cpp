#include <gtest/gtest.h>

#include "fmw/evaluator.hpp"
#include "fmw/parser.hpp"
#include "oracles.hpp"

using namespace fmw;

TEST(Parser, TransitiveClosureShape) {
  auto f = parse("[lfp P(x,y): E(x,y) | E z . (P(x,z) & P(z,y))](u,v)");
  ASSERT_EQ(f->kind, Kind::Fix);
  EXPECT_EQ(f->op, FixOp::LFP);
  EXPECT_EQ(sym_name(f->rel), "P");
  EXPECT_EQ(f->bound.size(), 2u);
  EXPECT_EQ(f->free_vars.size(), 2u); // u, v
}

TEST(Parser, RejectsNegativeOccurrence) { EXPECT_THROW(parse("[lfp P(x): !P(x)](x)"), Error); }

TEST(Parser, SentenceQuantifierRank) {
  auto f = parse("A x . x=x");
  EXPECT_TRUE(f->free_vars.empty());
  EXPECT_EQ(quantifier_rank(f), 1u);
}

TEST(Parser, ErrorsCarryPosition) {
  try {
    parse("E x . (x=x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("position"), std::string::npos);
  }
}

TEST(Parser, RoundTripThroughPrinter) {
  oracle::Rng rng(5);
  oracle::FormulaGen gen{rng};
  gen.relvar = "R";
  gen.relarity = 2;
  for (int i = 0; i < 500; ++i) {
    auto text = gen.formula(4, {"x", "y"});
    auto f = parse(text);
    auto g = parse(to_string(f));
    ASSERT_TRUE(equal(f, g)) << text << "\n" << to_string(f);
  }
}

TEST(Metrics, QuantifierRankClauses) {
  EXPECT_EQ(quantifier_rank(parse("E(x,y)")), 0u);
  EXPECT_EQ(quantifier_rank(parse("(E x . E(x,y)) | A y . A z . E(y,z)")), 2u);
  EXPECT_EQ(quantifier_rank(parse("E x . E(x,y) | A y . A z . E(y,z)")), 3u); // scope runs to the right
  EXPECT_EQ(quantifier_rank(parse("!(E x . x=y)")), 1u);
}

TEST(Metrics, DistanceFamilyRank) {
  for (std::size_t i = 0; i <= 5; ++i) {
    auto f = parse(oracle::distance_formula(i));
    EXPECT_EQ(quantifier_rank(f), i);
    EXPECT_LE(count_metrics(f).distinct_variables, 3u);
  }
}

TEST(Metrics, PairwiseDistinctFormula) {
  auto m = count_metrics(parse("v1!=v2 & v1!=v3 & v2!=v3"));
  EXPECT_EQ(m.distinct_variables, 3u);
  EXPECT_EQ(m.connectives, 2u);
}

TEST(Metrics, QuantifierSymbols) {
  auto m = count_metrics(parse("A x . E y . A z . E(x,y) -> E(y,z)"));
  EXPECT_EQ(m.forall_symbols, 2u);
  EXPECT_EQ(m.exists_symbols, 1u);
  EXPECT_EQ(m.quantifier_rank, 3u);
}

TEST(Positivity, Checks) {
  EXPECT_TRUE(is_positive_in(parse("E(x,y) | E z . R(x,z) & R(z,y)"), "R"));
  EXPECT_FALSE(is_positive_in(parse("!R(x,y)"), "R"));
  EXPECT_FALSE(is_positive_in(parse("R(x,y) -> E(x,y)"), "R"));
  EXPECT_TRUE(is_positive_in(parse("E(x,y) -> R(x,y)"), "R"));
  EXPECT_FALSE(is_positive_in(parse("R(x,y) <-> E(x,y)"), "R"));
  EXPECT_TRUE(is_positive_in(parse("!!R(x,y)"), "R"));
}

TEST(Positivity, GeneratedBodiesArePositive) {
  oracle::Rng rng(8);
  oracle::FormulaGen gen{rng};
  gen.relvar = "R";
  for (int i = 0; i < 300; ++i) ASSERT_TRUE(is_positive_in(parse(gen.formula(4, {"x"})), "R"));
}

TEST(OfficialSyntax, PreservesTruth) {
  oracle::Rng rng(9);
  oracle::FormulaGen gen{rng};
  Vocabulary v({{"E", 2}}, {});
  for (int i = 0; i < 300; ++i) {
    auto f = parse(gen.formula(4, {}));
    auto g = to_official_syntax(f);
    auto A = oracle::random_structure(v, 3, rng);
    ASSERT_EQ(satisfies(A, f), satisfies(A, g)) << to_string(f);
  }
}
