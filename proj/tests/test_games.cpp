#include <gtest/gtest.h>

#include "fmw/games.hpp"
#include "fmw/json_io.hpp"
#include "oracles.hpp"

using namespace fmw;

namespace {

Structure corpus(const std::string& name) { return load_structure(std::string(FMW_CORPUS_DIR) + "/" + name); }

Position pos_of(const oracle::PebblePos& p) { return {p.a, p.b}; }

std::vector<Structure> small_graphs(std::size_t max_n) {
  std::vector<Structure> out;
  for (std::size_t n = 1; n <= max_n; ++n)
    for (auto& A : enumerate_structures(Vocabulary({{"E", 2}}, {}), n, 1 << 10)) out.push_back(A);
  return out;
}

} // namespace

TEST(GamesCorpus, OrdersTwoThreeEf) {
  auto r = ef_game(corpus("structures/ord2.json"), {}, corpus("structures/ord3.json"), {}, 3);
  EXPECT_EQ(r.winner, Player::Spoiler);
  ASSERT_TRUE(r.spoiler_opening);
  EXPECT_EQ(r.spoiler_opening->side, Side::B);
  EXPECT_EQ(r.spoiler_opening->element, 0);
  EXPECT_EQ(ef_game(linear_order(2), {}, linear_order(3), {}, 2).winner, Player::Spoiler);
  EXPECT_EQ(ef_game(linear_order(2), {}, linear_order(3), {}, 1).winner, Player::Duplicator);
}

TEST(GamesCorpus, OrdersTwoThreePebble) {
  auto r = pebble_game(linear_order(2), {}, linear_order(3), {}, 3, 3);
  EXPECT_EQ(r.winner, Player::Spoiler);
  ASSERT_TRUE(r.spoiler_opening);
  EXPECT_EQ(r.spoiler_opening->side, Side::B);
  EXPECT_EQ(r.spoiler_opening->pebble, 0u);
  EXPECT_EQ(r.spoiler_opening->element, 0);
}

TEST(GamesCorpus, OrdersWithEndpoints) {
  auto A = corpus("structures/ord6-minmax.json"), B = corpus("structures/ord7-minmax.json");
  EXPECT_EQ(ef_game(A, {}, B, {}, 2).winner, Player::Duplicator);
  EXPECT_EQ(ef_game(A, {}, B, {}, 3).winner, Player::Spoiler);
}

TEST(GamesCorpus, CycleVersusTwoCycles) {
  auto A = corpus("structures/c5.json"), B = corpus("structures/c5c5.json");
  EXPECT_EQ(ef_game(A, {}, B, {}, 2).winner, Player::Duplicator);
  EXPECT_EQ(ef_game(A, {}, B, {}, 3).winner, Player::Spoiler);
}

TEST(GamesCorpus, OnesTenVersusNine) {
  auto A = corpus("words/ones10.json"), B = corpus("words/ones9.json");
  EXPECT_EQ(ef_game(A, {}, B, {}, 3).winner, Player::Duplicator);
  EXPECT_EQ(pebble_game(A, {}, B, {}, 2, 3).winner, Player::Duplicator);
  EXPECT_EQ(ef_game(A, {}, B, {}, 4).winner, Player::Spoiler);
}

TEST(GamesCorpus, PathsTenVersusNine) {
  auto A = path_graph(10, true), B = path_graph(9, true);
  EXPECT_EQ(ef_game(A, {}, B, {}, 2).winner, Player::Duplicator);
  EXPECT_EQ(ef_game(A, {}, B, {}, 3).winner, Player::Spoiler);
  // φ_3(s,t) says the walk from s to t has length exactly 8: the 9-node path.
  auto phi = parse(oracle::distance_formula(3, 'x', 'y'));
  EXPECT_EQ(quantifier_rank(phi), 3u);
  Assignment aA, aB;
  aA.set("x", A.constant("s")).set("y", A.constant("t"));
  aB.set("x", B.constant("s")).set("y", B.constant("t"));
  EXPECT_FALSE(satisfies(A, phi, aA));
  EXPECT_TRUE(satisfies(B, phi, aB));
}

TEST(Games, ZeroMovesIsPartialIsoCheck) {
  auto A = linear_order(3);
  EXPECT_EQ(ef_game(A, {0, 1}, A, {0, 2}, 0).winner, Player::Duplicator);
  EXPECT_EQ(ef_game(A, {0, 1}, A, {1, 0}, 0).winner, Player::Spoiler);
  EXPECT_EQ(pebble_game(A, {0}, A, {2}, 1, 0).winner, Player::Duplicator);
}

TEST(Games, InputValidation) {
  auto A = linear_order(3);
  EXPECT_THROW(ef_game(A, {0}, A, {}, 1), Error);
  EXPECT_THROW(pebble_game(A, {0, 1}, A, {0, 1}, 1, 1), Error);
  EXPECT_THROW(pebble_game(A, {0}, A, {}, 1, 1), Error);
  EXPECT_THROW(ef_game(A, {}, cycle_graph(2), {}, 1), Error);
  EXPECT_THROW(pebble_win_sets(linear_order(9), linear_order(9), 4, std::nullopt, 1000), BoundExceeded);
}

TEST(GamesProperty, EFMatchesBruteForce) {
  auto graphs = small_graphs(3);
  oracle::Rng rng(31);
  std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
  for (int trial = 0; trial < 1500; ++trial) {
    const auto& A = graphs[pick(rng)];
    const auto& B = graphs[pick(rng)];
    std::size_t m = trial % 3;
    bool dup = ef_game(A, {}, B, {}, m).winner == Player::Duplicator;
    ASSERT_EQ(dup, oracle::ef_duplicator(A, B, {}, m)) << structure_to_json(A).dump() << structure_to_json(B).dump() << m;
  }
}

TEST(GamesProperty, EFWithInitialTuples) {
  oracle::Rng rng(32);
  Vocabulary v({{"E", 2}, {"P", 1}}, {"c"});
  for (int trial = 0; trial < 400; ++trial) {
    auto A = oracle::random_structure(v, 3, rng), B = oracle::random_structure(v, 3, rng);
    std::uniform_int_distribution<Element> e(0, 2);
    Element a = e(rng), b = e(rng);
    std::size_t m = trial % 3;
    bool dup = ef_game(A, {a}, B, {b}, m).winner == Player::Duplicator;
    ASSERT_EQ(dup, oracle::ef_duplicator(A, B, {{a, b}}, m));
  }
}

TEST(GamesProperty, WinSetsMatchRefinementOracle) {
  oracle::Rng rng(33);
  auto graphs = small_graphs(3);
  std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
  for (int trial = 0; trial < 60; ++trial) {
    const auto& A = graphs[pick(rng)];
    const auto& B = graphs[pick(rng)];
    std::size_t s = 1 + trial % 2;
    auto ref = oracle::pebble_levels(A, B, s);
    WinSets w(A, B, s, std::nullopt);
    ASSERT_EQ(*w.stabilized_at(), ref.stable);
    for (std::size_t j = 0; j <= ref.stable + 1; ++j) {
      const auto& level = ref.levels[std::min(j, ref.stable)];
      ASSERT_EQ(w.level_size(std::min(j, w.level_count() - 1)), level.size()) << j;
      for (const auto& p : level) ASSERT_TRUE(w.contains(j, pos_of(p)));
    }
  }
}

TEST(GamesProperty, WChainAndStabilizationBound) {
  oracle::Rng rng(34);
  Vocabulary v({{"E", 2}}, {});
  for (int trial = 0; trial < 40; ++trial) {
    auto A = oracle::random_structure(v, 3, rng), B = oracle::random_structure(v, 4, rng);
    WinSets w(A, B, 2, std::nullopt);
    for (std::size_t j = 1; j < w.level_count(); ++j)
      for (const auto& p : w.members(j)) ASSERT_TRUE(w.contains(j - 1, p));
    ASSERT_LE(*w.stabilized_at(), 16u * 25u);
  }
}

TEST(GamesProperty, PebbleMatchesWinSetsWithoutTable) {
  // A large win_bound forces the table; 0 forces the memoized search.
  oracle::Rng rng(35);
  Vocabulary v({{"E", 2}}, {});
  for (int trial = 0; trial < 80; ++trial) {
    auto A = oracle::random_structure(v, 3, rng), B = oracle::random_structure(v, 3, rng);
    std::size_t s = 1 + trial % 2, m = trial % 4;
    auto with = pebble_game(A, {}, B, {}, s, m);
    auto without = pebble_game(A, {}, B, {}, s, m, 0);
    ASSERT_EQ(with.winner, without.winner);
  }
}

TEST(GamesProperty, Determinacy) {
  oracle::Rng rng(36);
  Vocabulary v({{"E", 2}}, {});
  for (int trial = 0; trial < 100; ++trial) {
    auto A = oracle::random_structure(v, 3, rng), B = oracle::random_structure(v, 3, rng);
    auto r = ef_game(A, {}, B, {}, 2);
    bool spoiler_has_move = false;
    if (r.winner == Player::Spoiler) {
      ASSERT_TRUE(r.spoiler_opening);
      spoiler_has_move = true;
    }
    ASSERT_EQ(spoiler_has_move, !oracle::ef_duplicator(A, B, {}, 2));
  }
}

TEST(GamesProperty, MonotoneInResources) {
  oracle::Rng rng(37);
  Vocabulary v({{"E", 2}}, {});
  for (int trial = 0; trial < 40; ++trial) {
    auto A = oracle::random_structure(v, 3, rng), B = oracle::random_structure(v, 3, rng);
    for (std::size_t s = 1; s <= 2; ++s)
      for (std::size_t m = 0; m <= 3; ++m) {
        if (pebble_game(A, {}, B, {}, s, m).winner != Player::Spoiler) continue;
        ASSERT_EQ(pebble_game(A, {}, B, {}, s, m + 1).winner, Player::Spoiler);
        ASSERT_EQ(pebble_game(A, {}, B, {}, s + 1, m).winner, Player::Spoiler);
      }
  }
}

/// B ⊨ ψ_ā^m[b̄] iff Duplicator wins G_m^s from ā ↦ b̄.
TEST(GamesProperty, IsoTypeFormulaCharacterizesGame) {
  Vocabulary v({{"P", 1}, {"E", 2}}, {});
  oracle::Rng rng(38);
  std::size_t cases = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t na = 1 + trial % 3, nb = 1 + (trial / 3) % 3;
    auto A = oracle::random_structure(v, na, rng), B = oracle::random_structure(v, nb, rng);
    std::size_t s = 1 + trial % 2, m = trial % 3;
    IsoTypeBuilder builder(A, s);
    for (const auto& a : padded_tuples(na, s))
      for (const auto& b : padded_tuples(nb, s)) {
        bool support = true;
        for (std::size_t i = 0; i < s; ++i) support &= (a[i] == kStar) == (b[i] == kStar);
        if (!support) continue;
        Formula psi = builder.psi(a, m);
        ASSERT_EQ(quantifier_rank(psi), m);
        bool sat = satisfies(B, psi, pebble_assignment(b));
        bool dup = pebble_game(A, a, B, b, s, m).winner == Player::Duplicator;
        ASSERT_EQ(sat, dup);
        ++cases;
      }
  }
  EXPECT_GT(cases, 500u);
}

TEST(GamesProperty, ScottFormulaCharacterizesInfinityEquivalence) {
  auto graphs = small_graphs(2);
  oracle::Rng rng(39);
  for (std::size_t s = 1; s <= 2; ++s)
    for (const auto& A : graphs) {
      Formula sigma = scott_formula(A, std::vector<Element>(s, kStar), s);
      ASSERT_EQ(quantifier_rank(sigma), s_rank(A, s) + 1 + s);
      ASSERT_TRUE(satisfies(A, sigma));
      for (const auto& B : graphs) {
        auto levels = oracle::pebble_levels(A, B, s);
        oracle::PebblePos start{std::vector<Element>(s, -1), std::vector<Element>(s, -1)};
        ASSERT_EQ(satisfies(B, sigma), levels.levels.back().count(start) > 0);
      }
    }
}

/// Stage j+1 of the φ_{s,∞} fixed point on (A,A) is the complement of W_j; its depth is s_rank + 1
/// unless no atomic formula separates any two full tuples (then F_1 is already empty).
TEST(GamesProperty, PhiSInfinityStagesAreComplementsOfW) {
  oracle::Rng rng(40);
  Vocabulary v({{"E", 2}}, {"c"});
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t n = 1 + trial % 3, s = 1 + trial % 2;
    auto A = oracle::random_structure(v, n, rng);
    Formula body = phi_s_infinity(A.vocab(), s);
    ASSERT_TRUE(is_positive_in(body, "Z"));
    auto vars = phi_s_infinity_vars(s);
    auto tr = stages(A, body, intern("Z"), vars);
    WinSets w(A, A, s, std::nullopt);
    ASSERT_TRUE(tr.verdict.fixed);
    ASSERT_EQ(tr.verdict.depth, (tr.stages.size() < 2 || tr.stages[1].empty()) ? 0 : s_rank(A, s) + 1);
    for (std::size_t j = 1; j < tr.stages.size(); ++j)
      for (const auto& t : padded_tuples(n, 2 * s)) {
        bool full = std::find(t.begin(), t.end(), kStar) == t.end();
        if (!full) continue;
        Position p{{t.begin(), t.begin() + s}, {t.begin() + s, t.end()}};
        ASSERT_EQ(tr.stages[j].contains(t), !w.contains(j - 1, p)) << j;
      }
  }
}

TEST(Games, SRankValues) {
  EXPECT_EQ(s_rank(linear_order(1), 1), 0u);
  auto ref = oracle::pebble_levels(linear_order(4), linear_order(4), 1);
  EXPECT_EQ(s_rank(linear_order(4), 1), ref.stable);
  EXPECT_EQ(s_rank(linear_order(4), 1), 0u);
  EXPECT_EQ(s_rank(linear_order(4), 2), oracle::pebble_levels(linear_order(4), linear_order(4), 2).stable);
  for (std::size_t n = 1; n <= 4; ++n) EXPECT_LE(s_rank(path_graph(n), 1), (n + 1) * (n + 1));
}

TEST(Games, SurveyConsistentWithSRank) {
  auto rows = survey_ranks("cycles", 2, {3, 4, 5, 6, 7, 8});
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].structures, 1u);
    EXPECT_EQ(rows[i].max_rank, s_rank(cycle_graph(rows[i].n - 1), 2));
    if (i) {
      EXPECT_GE(rows[i].max_rank, rows[i - 1].max_rank);
    }
  }
  auto paths = survey_ranks("paths", 2, {3, 4, 5});
  for (const auto& r : paths) EXPECT_EQ(r.max_rank, s_rank(path_graph(r.n), 2));
  EXPECT_THROW(survey_ranks("nope", 1, {3}), Error);
}

/// Following optimal_move from a winning side never gives the win away.
TEST(GamesProperty, StrategySoundnessPlayouts) {
  oracle::Rng rng(41);
  Vocabulary v({{"E", 2}}, {});
  for (int trial = 0; trial < 200; ++trial) {
    auto A = oracle::random_structure(v, 3, rng), B = oracle::random_structure(v, 3 + trial % 2, rng);
    std::size_t s = 2, m = 3;
    auto res = pebble_game(A, {}, B, {}, s, m);
    GameSolver& solver = *res.solver;
    Position p = res.start;
    Player winner = res.winner;
    for (std::size_t r = m; r > 0; --r) {
      std::optional<SpoilerMove> mv;
      if (winner == Player::Spoiler) mv = optimal_move(solver, p, r).spoiler;
      else {
        auto moves = solver.legal_spoiler_moves(p);
        mv = moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)];
      }
      Element reply;
      if (winner == Player::Duplicator) {
        auto h = optimal_move(solver, p, r, mv);
        ASSERT_TRUE(h.winning);
        reply = *h.reply;
      } else {
        reply = std::uniform_int_distribution<Element>(0, Element(solver.reply_range(*mv)) - 1)(rng);
      }
      bool ok = solver.move_ok(p, *mv, reply);
      p = solver.after(p, *mv, reply);
      if (winner == Player::Duplicator) {
        ASSERT_TRUE(ok && solver.duplicator_wins(p, r - 1));
      } else if (!ok) {
        break;
      } else {
        ASSERT_FALSE(solver.duplicator_wins(p, r - 1));
      }
    }
    if (winner == Player::Spoiler) {
      ASSERT_FALSE(solver.position_ok(p));
    }
  }
}

TEST(Games, WinSetsJson) {
  WinSets w(linear_order(2), linear_order(3), 1, std::nullopt);
  auto j = win_sets_to_json(w);
  EXPECT_EQ(j["pebbles"], 1);
  ASSERT_FALSE(j["levels"].empty());
  // The empty position is listed with null for the off-board pebble.
  bool found = false;
  for (const auto& pair : j["levels"][0])
    if (pair[0][0].is_null() && pair[1][0].is_null()) found = true;
  EXPECT_TRUE(found);
}
