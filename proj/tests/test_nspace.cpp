#include <gtest/gtest.h>

#include "fmw/evaluator.hpp"
#include "fmw/json_io.hpp"
#include "fmw/nspace.hpp"
#include "oracles.hpp"

using namespace fmw;

namespace {

const char* kMachines[] = {"accept-immediately", "consecutive-ones", "guess-one", "never-accept", "scan-for-one"};

NTMSpec machine(const std::string& name) { return load_ntm(std::string(FMW_CORPUS_DIR) + "/machines/" + name + ".json"); }

const Vocabulary& unary() {
  static Vocabulary v({{"P", 1}}, {}, true);
  return v;
}

/// Every unary P over {0..n-1}.
std::vector<Structure> unary_inputs(std::size_t n) {
  std::vector<Structure> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<Tuple> p;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) p.push_back({Element(i)});
    out.push_back(new_structure(unary(), n, {{"P", p}}, {}));
  }
  return out;
}

/// Walks of length exactly 2^i by repeated squaring of the adjacency matrix.
std::vector<std::vector<bool>> exact_walks(const Structure& A, std::size_t i) {
  std::size_t n = A.size();
  std::vector<std::vector<bool>> m(n, std::vector<bool>(n));
  for (const auto& t : A.relation("E").tuples()) m[t[0]][t[1]] = true;
  for (std::size_t k = 0; k < i; ++k) {
    std::vector<std::vector<bool>> sq(n, std::vector<bool>(n));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n && !sq[a][b]; ++c) sq[a][b] = m[a][c] && m[c][b];
    m = sq;
  }
  return m;
}

} // namespace

TEST(Savitch, ConnectivesAndVariables) {
  for (std::size_t i = 0; i <= 6; ++i) {
    auto f = savitch_formula(i);
    EXPECT_EQ(count_metrics(f).connectives, 4 * i) << i;
    EXPECT_LE(count_metrics(f).distinct_variables, 5u);
  }
}

TEST(SavitchProperty, ExactPowerWalks) {
  oracle::Rng rng(71);
  Vocabulary v({{"E", 2}}, {});
  std::vector<SymId> xy{intern("x"), intern("y")};
  for (int trial = 0; trial < 150; ++trial) {
    std::size_t n = 1 + trial % 5, i = trial % 4;
    auto A = oracle::random_structure(v, n, rng, 0.3);
    auto r = define(A, savitch_formula(i), xy);
    auto m = exact_walks(A, i);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) ASSERT_EQ(r.contains(Tuple{Element(a), Element(b)}), bool(m[a][b])) << n << " " << i;
  }
}

TEST(Layout, Parameters) {
  for (const char* name : kMachines)
    for (std::size_t m = 1; m <= 3; ++m)
      for (const char* f : {"logn", "n", "1"})
        for (std::size_t n = 2; n <= 9; ++n) {
          NTMSpec M = machine(name);
          M.m = m;
          M.f = f;
          auto L = make_layout(M, unary(), n);
          std::size_t b = 0;
          while ((std::size_t{2} << b) <= n) ++b;
          std::size_t bits = std::string(f) == "n" ? n : std::string(f) == "1" ? 1 : std::max<std::size_t>(1, oracle::clog2(n));
          std::size_t h = m * ((bits + b - 1) / b), t = 0, pw = 1;
          while (pw < h) pw *= n, ++t;
          EXPECT_EQ(L.word_bits, b);
          EXPECT_EQ(L.h, h);
          EXPECT_EQ(L.t, t);
          EXPECT_EQ(L.a, 1u);
          EXPECT_EQ(L.g, 4 + 1 + h + t);
          EXPECT_EQ(L.input_length, encode_binary(new_structure(unary(), n, {{"P", {}}}, {})).size());
        }
}

TEST(Layout, ConsecutiveOnesAtTwo) {
  auto cs = compile_sentence(machine("consecutive-ones"), unary(), 2);
  EXPECT_EQ(cs.layout.g, 6u);
  EXPECT_EQ(cs.skeleton_connectives, 24u);
  EXPECT_EQ(cs.edge_connectives, 98u);
  EXPECT_EQ(cs.psi1, 4u);
  EXPECT_EQ(cs.psi2, 22u);
  EXPECT_EQ(cs.psi3, 36u);
  EXPECT_EQ(cs.connectives, 122u);
  EXPECT_EQ(cs.distinct_variables, 31u);
}

TEST(Compile, SkeletonCount) {
  for (const char* name : kMachines)
    for (std::size_t n = 2; n <= 5; ++n) {
      auto cs = compile_sentence(machine(name), unary(), n);
      EXPECT_EQ(cs.savitch_level, cs.layout.g * oracle::clog2(n));
      EXPECT_EQ(cs.skeleton_connectives, 4 * cs.layout.g * oracle::clog2(n)) << name << " n=" << n;
      EXPECT_EQ(cs.connectives, cs.skeleton_connectives + cs.edge_connectives);
    }
}

TEST(Compile, Rejections) {
  NTMSpec M = machine("consecutive-ones");
  EXPECT_THROW(compile_sentence(M, Vocabulary({{"P", 1}}, {}, false), 2), Error);
  EXPECT_THROW(compile_sentence(M, unary(), 1), Error);
  M.states = 3;
  EXPECT_THROW(compile_sentence(M, unary(), 2), Error);
  M = machine("consecutive-ones");
  M.accept = 9;
  EXPECT_THROW(M.validate(), Error);
  M = machine("consecutive-ones");
  M.f = "n^2";
  EXPECT_THROW(M.validate(), Error);
}

TEST(Machines, Determinism) {
  EXPECT_TRUE(machine("consecutive-ones").deterministic());
  EXPECT_FALSE(machine("guess-one").deterministic());
}

TEST(Machines, RunMatchesIntendedLanguage) {
  for (std::size_t n = 2; n <= 5; ++n)
    for (const auto& A : unary_inputs(n)) {
      const auto& P = A.relation("P");
      bool any = P.count() > 0, adjacent = false;
      for (std::size_t i = 0; i + 1 < n; ++i) adjacent |= P.contains(Tuple{Element(i)}) && P.contains(Tuple{Element(i + 1)});
      EXPECT_TRUE(run_ntm(machine("accept-immediately"), A).accepted);
      EXPECT_FALSE(run_ntm(machine("never-accept"), A).accepted);
      EXPECT_EQ(run_ntm(machine("scan-for-one"), A).accepted, any);
      EXPECT_EQ(run_ntm(machine("guess-one"), A).accepted, any);
      EXPECT_EQ(run_ntm(machine("consecutive-ones"), A).accepted, adjacent);
    }
}

/// ψ_E defines exactly the edges of the configuration graph.
TEST(EdgeFormula, DefinesConfigurationGraph) {
  for (const char* name : kMachines)
    for (const auto& A : unary_inputs(2)) {
      NTMSpec M = machine(name);
      auto ef = edge_formula(M, unary(), 2);
      std::vector<SymId> vars = ef.from;
      vars.insert(vars.end(), ef.to.begin(), ef.to.end());
      Relation r = define(A, ef.formula, vars);
      Structure G = config_graph(M, A);
      const Relation& E = G.relation("E");
      const std::size_t N = G.size(), g = ef.layout.g;
      for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) {
          Tuple t = tuple_unrank(i, g, 2), u = tuple_unrank(j, g, 2);
          t.insert(t.end(), u.begin(), u.end());
          ASSERT_EQ(r.contains(t), E.contains(Tuple{Element(i), Element(j)})) << name << " " << i << "->" << j;
        }
    }
}

/// Run, graph search and the compiled sentence agree on every input of size 2.
TEST(Compile, SentenceAgreesWithRunAndGraph) {
  for (const char* name : kMachines) {
    NTMSpec M = machine(name);
    auto cs = compile_sentence(M, unary(), 2);
    for (const auto& A : unary_inputs(2)) {
      bool run = run_ntm(M, A).accepted;
      EXPECT_EQ(graph_reaches(config_graph(M, A)), run) << name;
      EXPECT_EQ(satisfies(A, cs.sentence), run) << name;
    }
  }
}

TEST(Compile, GraphAgreesWithRunAtThree) {
  for (const char* name : kMachines) {
    NTMSpec M = machine(name);
    for (const auto& A : unary_inputs(3)) EXPECT_EQ(graph_reaches(config_graph(M, A)), run_ntm(M, A).accepted) << name;
  }
}

TEST(Configs, EncodeDecodeRoundTrip) {
  NTMSpec M = machine("consecutive-ones");
  for (std::size_t n = 2; n <= 4; ++n) {
    auto L = make_layout(M, unary(), n);
    std::size_t valid = 0;
    for (std::size_t idx = 0; idx < checked_power(n, L.g); ++idx) {
      Tuple c = tuple_unrank(idx, L.g, n);
      auto mc = decode_config(L, M.states, c);
      if (!mc) continue;
      ++valid;
      ASSERT_EQ(encode_config(L, *mc), c);
    }
    EXPECT_GT(valid, 0u);
    EXPECT_FALSE(decode_config(L, M.states, Tuple(L.g, Element(n - 1))));
  }
}
