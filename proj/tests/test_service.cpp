#include <gtest/gtest.h>

#include <thread>

#include "fmw/json_io.hpp"
#include "fmw/service.hpp"
#include "oracles.hpp"
#include "service_http.hpp"

using namespace fmw;
using namespace fmw::service;

namespace {

json ef_orders(const std::string& human, std::size_t m = 3) {
  return {{"kind", "ef"}, {"m", m}, {"left", "order:2"}, {"right", "order:3"}, {"humanSide", human}};
}

/// Plays the hint until the game ends; returns the final view.
json follow_hints(SessionManager& mgr, const std::string& id) {
  json v = mgr.get(id);
  for (int guard = 0; v["status"] == "ongoing" && guard < 64; ++guard) v = mgr.play(id, mgr.hint(id)["move"]);
  return v;
}

} // namespace

TEST(Service, EngineSpoilerOpensWithZeroInB) {
  SessionManager mgr;
  auto r = mgr.create(ef_orders("duplicator"));
  const json& v = r["view"];
  EXPECT_EQ(v["status"], "ongoing");
  EXPECT_EQ(v["movesLeft"], 3);
  EXPECT_EQ(v["pendingSpoilerMove"]["structure"], "B");
  EXPECT_EQ(v["pendingSpoilerMove"]["element"], 0);
  EXPECT_EQ(v["lastEngineMove"], v["pendingSpoilerMove"]);
  EXPECT_EQ(v["pebbles"]["left"], json::array({nullptr, nullptr, nullptr}));
}

TEST(Service, LosingDuplicatorIsBeatenInTime) {
  SessionManager mgr;
  std::string id = mgr.create(ef_orders("duplicator"))["id"];
  EXPECT_FALSE(mgr.hint(id)["winning"]);
  auto v = follow_hints(mgr, id);
  EXPECT_EQ(v["status"], "engineWon");
  EXPECT_LE(v["history"].size(), 3u);
  EXPECT_THROW(mgr.play(id, {{"structure", "A"}, {"element", 0}}), GameOver);
  EXPECT_THROW(mgr.hint(id), GameOver);
}

TEST(Service, SpoilerHintOpensWithZeroInB) {
  SessionManager mgr;
  std::string id = mgr.create(ef_orders("spoiler"))["id"];
  auto h = mgr.hint(id);
  EXPECT_TRUE(h["winning"]);
  EXPECT_EQ(h["move"]["structure"], "B");
  EXPECT_EQ(h["move"]["element"], 0);
  EXPECT_EQ(follow_hints(mgr, id)["status"], "humanWon");
}

TEST(Service, PebbleSpoilerHasWinningHint) {
  SessionManager mgr;
  std::string id =
      mgr.create({{"kind", "pebble"}, {"s", 3}, {"m", 3}, {"left", "order:2"}, {"right", "order:3"}, {"humanSide", "spoiler"}})["id"];
  auto h = mgr.hint(id);
  EXPECT_TRUE(h["winning"]);
  EXPECT_EQ(follow_hints(mgr, id)["status"], "humanWon");
}

TEST(Service, ZeroMovesEndsImmediately) {
  SessionManager mgr;
  auto v = mgr.create(ef_orders("duplicator", 0))["view"];
  EXPECT_EQ(v["status"], "humanWon");
  auto w = mgr.create({{"kind", "ef"}, {"m", 0}, {"left", "order:3"}, {"right", "order:3"}, {"leftTuple", {0, 1}},
                       {"rightTuple", {1, 0}}, {"humanSide", "duplicator"}})["view"];
  EXPECT_EQ(w["status"], "engineWon");
}

TEST(Service, IllegalMovesNamed) {
  SessionManager mgr;
  std::string d = mgr.create(ef_orders("duplicator"))["id"];
  auto msg = [&](const std::string& id, const json& mv) {
    try {
      mgr.play(id, mv);
    } catch (const BadRequest& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg(d, {{"structure", "B"}, {"element", 0}}).find("wrong side"), std::string::npos);
  EXPECT_NE(msg(d, {{"structure", "A"}, {"element", 7}}).find("out of range"), std::string::npos);
  EXPECT_NE(msg(d, {{"structure", "A"}, {"element", 0}, {"pebble", 2}}).find("bad pebble"), std::string::npos);
  EXPECT_NE(msg(d, {{"structure", "C"}, {"element", 0}}).find("structure"), std::string::npos);
  std::string p =
      mgr.create({{"kind", "pebble"}, {"s", 2}, {"m", 3}, {"left", "order:2"}, {"right", "order:3"}, {"humanSide", "spoiler"}})["id"];
  EXPECT_NE(msg(p, {{"structure", "A"}, {"element", 0}, {"pebble", 2}}).find("bad pebble"), std::string::npos);
  EXPECT_NE(msg(p, {{"structure", "A"}, {"element", 0}}).find("pebble"), std::string::npos);
  EXPECT_EQ(mgr.get(d)["history"].size(), 0u);
}

TEST(Service, BadConfigs) {
  SessionManager mgr;
  EXPECT_THROW(mgr.create({{"kind", "chess"}, {"m", 1}, {"left", "order:2"}, {"right", "order:2"}}), BadRequest);
  EXPECT_THROW(mgr.create({{"kind", "ef"}, {"m", "inf"}, {"left", "order:2"}, {"right", "order:2"}}), BadRequest);
  EXPECT_THROW(mgr.create({{"kind", "pebble"}, {"m", 1}, {"left", "order:2"}, {"right", "order:2"}}), BadRequest);
  EXPECT_THROW(mgr.create({{"kind", "ef"}, {"m", -1}, {"left", "order:2"}, {"right", "order:2"}}), BadRequest);
  EXPECT_THROW(mgr.create({{"kind", "ef"}, {"m", 1}, {"left", "order:2"}}), BadRequest);
  // File paths are never opened for network input.
  EXPECT_THROW(mgr.create({{"kind", "ef"}, {"m", 1}, {"left", "/etc/passwd"}, {"right", "order:2"}}), Error);
  EXPECT_THROW(mgr.get("s999"), NotFound);
}

TEST(Service, BoundExceededReportsSize) {
  SessionManager::Options opt;
  opt.solver_bound = 1000;
  SessionManager mgr(opt);
  try {
    mgr.create({{"kind", "pebble"}, {"s", 3}, {"m", "inf"}, {"left", "order:9"}, {"right", "order:9"}});
    FAIL();
  } catch (const BoundExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("1000000"), std::string::npos) << e.what();
  }
}

TEST(Service, ReplayReproducesStatus) {
  oracle::Rng rng(81);
  for (int trial = 0; trial < 30; ++trial) {
    SessionManager mgr;
    json cfg = {{"kind", "ef"}, {"m", 3}, {"left", "cycle:4"}, {"right", "cycle:5"}, {"humanSide", "spoiler"}};
    std::string id = mgr.create(cfg)["id"];
    json v = mgr.get(id);
    while (v["status"] == "ongoing") {
      bool a = rng() % 2;
      v = mgr.play(id, {{"structure", a ? "A" : "B"}, {"element", int(rng() % (a ? 5 : 6))}});
    }
    std::string id2 = mgr.create(cfg)["id"];
    json w = mgr.get(id2);
    for (const auto& h : v["history"]) w = mgr.play(id2, {{"structure", h["spoiler"]["structure"]}, {"element", h["spoiler"]["element"]}});
    EXPECT_EQ(w["status"], v["status"]);
    EXPECT_EQ(w["history"], v["history"]);
    EXPECT_EQ(w["pebbles"], v["pebbles"]);
  }
}

/// From Duplicator-winning starts the engine never loses, and hints keep the human winning.
TEST(ServiceProperty, WinningSidesHoldUnderPlayouts) {
  oracle::Rng rng(82);
  Vocabulary v({{"E", 2}}, {});
  std::size_t dup_games = 0, spo_games = 0;
  for (int trial = 0; trial < 4000 && (dup_games < 100 || spo_games < 100); ++trial) {
    auto A = oracle::random_structure(v, 2 + trial % 3, rng, 0.4);
    auto B = oracle::random_structure(v, 2 + (trial / 3) % 3, rng, 0.4);
    std::size_t m = 1 + trial % 3;
    bool dup = ef_game(A, {}, B, {}, m).winner == Player::Duplicator;
    if ((dup ? dup_games : spo_games) >= 100) continue;
    SessionManager mgr;
    json base = {{"kind", "ef"}, {"m", m}, {"left", structure_to_json(A)}, {"right", structure_to_json(B)}};
    if (dup) {
      ++dup_games;
      // Engine as Duplicator against random Spoiler moves.
      json cfg = base;
      cfg["humanSide"] = "spoiler";
      std::string id = mgr.create(cfg)["id"];
      json w = mgr.get(id);
      while (w["status"] == "ongoing") {
        bool a = rng() % 2;
        w = mgr.play(id, {{"structure", a ? "A" : "B"}, {"element", int(rng() % (a ? A.size() : B.size()))}});
      }
      ASSERT_EQ(w["status"], "engineWon");
      // Human Duplicator following hints.
      cfg["humanSide"] = "duplicator";
      std::string id2 = mgr.create(cfg)["id"];
      ASSERT_TRUE(mgr.hint(id2)["winning"]);
      ASSERT_EQ(follow_hints(mgr, id2)["status"], "humanWon");
    } else {
      ++spo_games;
      json cfg = base;
      cfg["humanSide"] = "spoiler";
      std::string id = mgr.create(cfg)["id"];
      ASSERT_EQ(follow_hints(mgr, id)["status"], "humanWon");
      cfg["humanSide"] = "duplicator";
      std::string id2 = mgr.create(cfg)["id"];
      ASSERT_FALSE(mgr.hint(id2)["winning"]);
      ASSERT_EQ(follow_hints(mgr, id2)["status"], "engineWon");
    }
  }
  EXPECT_GE(dup_games, 100u);
  EXPECT_GE(spo_games, 100u);
}

TEST(Service, IdleSessionsExpire) {
  auto now = std::make_shared<SessionManager::Clock::time_point>(SessionManager::Clock::time_point{});
  SessionManager::Options opt;
  opt.idle_timeout = std::chrono::seconds(60);
  opt.now = [now] { return *now; };
  SessionManager mgr(opt);
  std::string a = mgr.create(ef_orders("spoiler"))["id"];
  *now += std::chrono::seconds(40);
  std::string b = mgr.create(ef_orders("spoiler"))["id"];
  *now += std::chrono::seconds(40);
  EXPECT_EQ(mgr.expire(), 1u);
  EXPECT_THROW(mgr.get(a), NotFound);
  EXPECT_NO_THROW(mgr.get(b)); // touches b
  *now += std::chrono::seconds(59);
  EXPECT_NO_THROW(mgr.get(b));
  EXPECT_EQ(mgr.size(), 1u);
}

TEST(Service, SessionLimit) {
  SessionManager::Options opt;
  opt.max_sessions = 2;
  SessionManager mgr(opt);
  mgr.create(ef_orders("spoiler"));
  mgr.create(ef_orders("spoiler"));
  EXPECT_THROW(mgr.create(ef_orders("spoiler")), Error);
}

TEST(Service, ConcurrentSessionsAndReaders) {
  SessionManager mgr;
  std::vector<std::string> ids;
  for (int i = 0; i < 8; ++i) ids.push_back(mgr.create(ef_orders("spoiler"))["id"]);
  std::atomic<bool> done{false};
  std::atomic<std::size_t> reads{0};
  std::thread reader([&] {
    while (!done)
      for (const auto& id : ids) {
        auto v = mgr.get(id);
        EXPECT_TRUE(v.contains("status"));
        ++reads;
      }
  });
  std::vector<std::thread> players;
  std::vector<std::string> finals(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    players.emplace_back([&, i] { finals[i] = follow_hints(mgr, ids[i])["status"]; });
  for (auto& t : players) t.join();
  done = true;
  reader.join();
  for (const auto& f : finals) EXPECT_EQ(f, "humanWon");
  EXPECT_GT(reads.load(), 0u);
}

// Two threads racing on one session never corrupt its history.
TEST(Service, SameSessionMovesSerialized) {
  SessionManager mgr;
  std::string id = mgr.create({{"kind", "ef"}, {"m", 40}, {"left", "order:3"}, {"right", "order:3"}, {"humanSide", "spoiler"}})["id"];
  std::vector<std::thread> ts;
  std::atomic<int> ok{0};
  for (int t = 0; t < 4; ++t)
    ts.emplace_back([&] {
      for (int k = 0; k < 20; ++k) try {
          mgr.play(id, {{"structure", "A"}, {"element", k % 3}});
          ++ok;
        } catch (const GameOver&) {
        }
    });
  for (auto& t : ts) t.join();
  auto v = mgr.get(id);
  EXPECT_EQ(v["history"].size(), std::size_t(ok.load()));
  EXPECT_EQ(v["movesLeft"].get<int>() + ok.load(), 40);
}

TEST(ServiceHttp, RoundTrip) {
  SessionManager mgr;
  httplib::Server srv;
  register_routes(srv, mgr);
  int port = srv.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  auto r = cli.Post("/sessions", ef_orders("duplicator").dump(), "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  auto created = json::parse(r->body);
  std::string id = created["id"];
  EXPECT_EQ(created["view"]["pendingSpoilerMove"]["structure"], "B");

  r = cli.Get("/sessions/" + id + "/hint");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  auto hint = json::parse(r->body);
  EXPECT_FALSE(hint["winning"]);

  json view;
  for (int i = 0; i < 3; ++i) {
    r = cli.Get("/sessions/" + id + "/hint");
    if (r->status != 200) break;
    r = cli.Post("/sessions/" + id + "/moves", json::parse(r->body)["move"].dump(), "application/json");
    ASSERT_EQ(r->status, 200) << r->body;
    view = json::parse(r->body);
    if (view["status"] != "ongoing") break;
  }
  EXPECT_EQ(view["status"], "engineWon");
  r = cli.Get("/sessions/" + id);
  EXPECT_EQ(json::parse(r->body), view);

  r = cli.Post("/sessions/" + id + "/moves", R"({"structure":"A","element":0})", "application/json");
  EXPECT_EQ(r->status, 409);
  EXPECT_TRUE(json::parse(r->body).contains("error"));
  EXPECT_EQ(cli.Get("/sessions/nosuch")->status, 404);
  EXPECT_EQ(cli.Post("/sessions", "{not json", "application/json")->status, 400);
  EXPECT_EQ(cli.Post("/sessions", R"({"kind":"ef","m":1,"left":"/etc/passwd","right":"order:2"})", "application/json")->status, 400);

  SessionManager::Options small;
  small.solver_bound = 100;
  SessionManager tight(small);
  httplib::Server srv2;
  register_routes(srv2, tight);
  int port2 = srv2.bind_to_any_port("127.0.0.1");
  std::thread th2([&] { srv2.listen_after_bind(); });
  srv2.wait_until_ready();
  httplib::Client cli2("127.0.0.1", port2);
  auto big = cli2.Post("/sessions", R"({"kind":"pebble","s":3,"m":"inf","left":"order:6","right":"order:6"})", "application/json");
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 422);

  srv.stop();
  srv2.stop();
  th.join();
  th2.join();
}
