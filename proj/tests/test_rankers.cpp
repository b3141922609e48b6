#include <gtest/gtest.h>

#include "fmw/games.hpp"
#include "fmw/rankers.hpp"
#include "oracles.hpp"

using namespace fmw;

namespace {

std::string random_word(oracle::Rng& rng, const std::string& alphabet, std::size_t len) {
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string w;
  for (std::size_t i = 0; i < len; ++i) w += alphabet[pick(rng)];
  return w;
}

std::string random_ranker_text(oracle::Rng& rng, const std::string& alphabet, std::size_t len) {
  std::string r;
  for (std::size_t i = 0; i < len; ++i) r += std::string(rng() % 2 ? ">" : "<") + alphabet[rng() % alphabet.size()];
  return r;
}

} // namespace

TEST(Boundary, FirstAndLast) {
  EXPECT_EQ(boundary("abcab", Direction::First, 'b'), 2u);
  EXPECT_EQ(boundary("abcab", Direction::Last, 'b'), 5u);
  EXPECT_EQ(boundary("abcab", Direction::First, 'b', 2), 5u);
  EXPECT_EQ(boundary("abcab", Direction::Last, 'a', 4), 1u);
  EXPECT_EQ(boundary("abcab", Direction::First, 'c', 3), std::nullopt);
  EXPECT_EQ(boundary("abcab", Direction::Last, 'a', 1), std::nullopt);
  EXPECT_THROW(boundary("ab", Direction::First, 'a', 3), Error);
  EXPECT_THROW(boundary("ab", Direction::First, 'z', std::nullopt, "ab"), Error);
}

TEST(Ranker, OnesOfLengthTenAndNine) {
  auto r = parse_ranker(">1>1>1>1>1>1>1>1>1>1");
  EXPECT_EQ(r.size(), 10u);
  EXPECT_EQ(ranker_eval(r, std::string(10, '1')), 10u);
  EXPECT_EQ(ranker_eval(r, std::string(9, '1')), std::nullopt);
}

// ◁a is measured strictly before the previous position, so from position 1 nothing is left.
TEST(Ranker, FirstThenLastOnAa) {
  EXPECT_EQ(ranker_eval(parse_ranker(">a<a"), "aa"), std::nullopt);
  EXPECT_EQ(ranker_eval(parse_ranker("<a>a"), "aa"), std::nullopt);
  EXPECT_EQ(ranker_eval(parse_ranker("<a<a"), "aa"), 1u);
  EXPECT_EQ(oracle::ranker(">a<a", "aa"), std::nullopt);
}

TEST(Ranker, ParseAndPrint) {
  EXPECT_EQ(to_string(parse_ranker(">a <b >1")), ">a<b>1");
  EXPECT_THROW(parse_ranker(""), ParseError);
  EXPECT_THROW(parse_ranker("a>b"), ParseError);
  EXPECT_THROW(parse_ranker(">a>"), ParseError);
  EXPECT_THROW(ranker_eval({}, "ab"), Error);
}

TEST(Ranker, AlphabetChecked) {
  EXPECT_THROW(ranker_eval(parse_ranker(">c"), "ab", "ab"), Error);
  // Letters after an undefined step are still checked.
  EXPECT_THROW(ranker_eval(parse_ranker(">b>a>c"), "ab", "ab"), Error);
  EXPECT_EQ(ranker_eval(parse_ranker(">b>a"), "ab", "ab"), std::nullopt);
}

TEST(RankerProperty, MatchesScanOracle) {
  oracle::Rng rng(61);
  for (int i = 0; i < 20000; ++i) {
    std::string w = random_word(rng, "ab", 1 + rng() % 10);
    std::string r = random_ranker_text(rng, "ab", 1 + rng() % 5);
    ASSERT_EQ(ranker_eval(parse_ranker(r), w), oracle::ranker(r, w)) << r << " on " << w;
  }
}

TEST(RankerProperty, DefinedPrefixes) {
  oracle::Rng rng(62);
  for (int i = 0; i < 5000; ++i) {
    std::string w = random_word(rng, "abc", 1 + rng() % 9);
    auto r = parse_ranker(random_ranker_text(rng, "abc", 2 + rng() % 4));
    if (!ranker_eval(r, w)) continue;
    for (std::size_t k = 1; k < r.size(); ++k) ASSERT_TRUE(ranker_eval(Ranker(r.begin(), r.begin() + k), w));
  }
}

TEST(RankerProperty, ForwardRankersIncrease) {
  oracle::Rng rng(63);
  for (int i = 0; i < 3000; ++i) {
    std::string w = random_word(rng, "ab", 1 + rng() % 12);
    std::size_t prev = 0;
    Ranker r;
    for (int k = 0; k < 6; ++k) {
      r.push_back({Direction::First, "ab"[rng() % 2]});
      auto p = ranker_eval(r, w);
      if (!p) break;
      ASSERT_GT(*p, prev);
      prev = *p;
    }
  }
}

/// 1^{2ⁿ+2} vs 1^{2ⁿ+1}: the forward ranker of length 2ⁿ+2 separates, games with n moves do not.
class OnesSeparation : public ::testing::TestWithParam<std::size_t> {};

TEST_P(OnesSeparation, RankerSeparatesGamesDoNot) {
  std::size_t n = GetParam(), len = (std::size_t{1} << n) + 2;
  std::string w1(len, '1'), w2(len - 1, '1');
  auto r = parse_ranker([&] {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += ">1";
    return s;
  }());
  EXPECT_TRUE(ranker_eval(r, w1));
  EXPECT_FALSE(ranker_eval(r, w2));
  auto A = word_structure(w1, "1"), B = word_structure(w2, "1");
  EXPECT_EQ(ef_game(A, {}, B, {}, n).winner, Player::Duplicator);
  for (std::size_t s = 1; s <= 4; ++s) EXPECT_EQ(pebble_game(A, {}, B, {}, s, n, 40'000'000).winner, Player::Duplicator) << s;
}

INSTANTIATE_TEST_SUITE_P(N1To3, OnesSeparation, ::testing::Values(1, 2, 3));
