#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "games.hpp"
#include "json_io.hpp"

namespace fmw::service {

/// Maps to HTTP 404.
struct NotFound : Error {
  using Error::Error;
};
/// Bad request body or illegal move; maps to HTTP 400 (409 when the game is over).
struct BadRequest : Error {
  using Error::Error;
};
struct GameOver : Error {
  using Error::Error;
};

enum class Status { Ongoing, HumanWon, EngineWon };

inline const char* to_string(Status s) {
  return s == Status::Ongoing ? "ongoing" : s == Status::HumanWon ? "humanWon" : "engineWon";
}

struct HistoryEntry {
  SpoilerMove spoiler;
  Element reply = 0;
  Player human = Player::Spoiler;
};

struct SessionConfig {
  bool ef = true;
  Rounds m = 0; // nullopt: unbounded pebble game
  std::size_t s = 1;
  Structure left, right;
  std::vector<Element> left_tuple, right_tuple;
  Player human = Player::Duplicator;
};

namespace detail {

inline Side side_from_json(const json& j) {
  if (!j.is_string()) throw BadRequest("'structure' must be \"A\" or \"B\"");
  auto s = j.get<std::string>();
  if (s == "A" || s == "left") return Side::A;
  if (s == "B" || s == "right") return Side::B;
  throw BadRequest("'structure' must be \"A\" or \"B\", got '" + s + "'");
}

inline Structure structure_field(const json& j, const char* key) {
  if (!j.contains(key)) throw BadRequest(std::string("missing '") + key + "'");
  const json& v = j[key];
  if (v.is_object()) return structure_from_json(v);
  if (v.is_string()) return structure_from_spec(v.get<std::string>(), false);
  throw BadRequest(std::string("'") + key + "' must be a structure object or a preset name");
}

inline std::vector<Element> tuple_field(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_array()) throw BadRequest(std::string("'") + key + "' must be an array");
  std::vector<Element> out;
  for (const auto& e : j[key]) {
    if (!e.is_number_integer()) throw BadRequest(std::string("'") + key + "' must hold integers");
    out.push_back(e.get<Element>());
  }
  return out;
}

inline json move_to_json(const SpoilerMove& m) {
  return {{"structure", to_string(m.side)}, {"pebble", m.pebble}, {"element", m.element}};
}

} // namespace detail

inline SessionConfig config_from_json(const json& j) {
  if (!j.is_object()) throw BadRequest("session config must be a JSON object");
  SessionConfig c;
  try {
    std::string kind = j.value("kind", "ef");
    if (kind != "ef" && kind != "pebble") throw BadRequest("'kind' must be \"ef\" or \"pebble\"");
    c.ef = kind == "ef";
    if (!j.contains("m")) throw BadRequest("missing 'm'");
    const json& m = j["m"];
    if (m.is_null() || (m.is_string() && m.get<std::string>() == "inf")) {
      if (c.ef) throw BadRequest("EF games need a finite 'm'");
      c.m = std::nullopt;
    } else if (m.is_number_integer() && m.get<long long>() >= 0) {
      c.m = m.get<std::size_t>();
    } else {
      throw BadRequest("'m' must be a non-negative integer or \"inf\"");
    }
    if (!c.ef) {
      if (!j.contains("s") || !j["s"].is_number_integer() || j["s"].get<long long>() < 1)
        throw BadRequest("pebble games need 's' >= 1");
      c.s = j["s"].get<std::size_t>();
    }
    c.left = detail::structure_field(j, "left");
    c.right = detail::structure_field(j, "right");
    c.left_tuple = detail::tuple_field(j, "leftTuple");
    c.right_tuple = detail::tuple_field(j, "rightTuple");
    std::string side = j.value("humanSide", "duplicator");
    for (auto& ch : side) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (side == "spoiler") c.human = Player::Spoiler;
    else if (side == "duplicator") c.human = Player::Duplicator;
    else throw BadRequest("'humanSide' must be \"spoiler\" or \"duplicator\"");
  } catch (const json::exception& e) {
    throw BadRequest(std::string("malformed session config: ") + e.what());
  }
  return c;
}

/// One game in progress. Mutations hold `mu`; readers take the published snapshot.
class Session {
public:
  Session(std::string id, SessionConfig cfg, std::size_t bound) : id_(std::move(id)), cfg_(std::move(cfg)) {
    if (cfg_.ef) {
      if (cfg_.left_tuple.size() != cfg_.right_tuple.size()) throw BadRequest("initial tuples differ in length");
      auto s = std::make_shared<EFSolver>(cfg_.left, cfg_.right, cfg_.left_tuple.size(), *cfg_.m, bound);
      solver_ = s;
    } else {
      if (cfg_.left_tuple.size() > cfg_.s || cfg_.right_tuple.size() > cfg_.s)
        throw BadRequest("initial tuples are longer than the number of pebbles");
      if (cfg_.left_tuple.size() != cfg_.right_tuple.size()) throw BadRequest("initial tuples differ in length");
      auto s = std::make_shared<PebbleSolver>(cfg_.left, cfg_.right, cfg_.s, bound);
      if (!s->win_sets()) {
        long double space = std::pow(static_cast<long double>(cfg_.left.size() + 1), cfg_.s) *
                            std::pow(static_cast<long double>(cfg_.right.size() + 1), cfg_.s);
        throw BoundExceeded("pebble position space has " + std::to_string(static_cast<unsigned long long>(space)) +
                            " positions, above the session bound " + std::to_string(bound));
      }
      solver_ = s;
    }
    pos_ = initial_position(cfg_.left_tuple, cfg_.right_tuple, solver_->slots());
    left_ = cfg_.m;
    // Warms the solver so later moves only hit cached results.
    bool dup = solver_->duplicator_wins(pos_, left_);
    (void)dup;
    if (!solver_->position_ok(pos_)) finish(Player::Spoiler);
    else if (left_ && *left_ == 0) finish(Player::Duplicator);
    else if (cfg_.human == Player::Duplicator) engine_spoiler();
    publish();
  }

  const std::string& id() const { return id_; }

  std::shared_ptr<const json> view() const { return std::atomic_load(&snapshot_); }

  json play(const json& move) {
    std::lock_guard lock(mu_);
    if (status_ != Status::Ongoing) throw GameOver("the game is over (" + std::string(to_string(status_)) + ")");
    if (!move.is_object()) throw BadRequest("a move must be a JSON object");
    Side side = detail::side_from_json(move.value("structure", json()));
    if (!move.contains("element") || !move["element"].is_number_integer())
      throw BadRequest("'element' must be an integer");
    Element element = move["element"].get<Element>();
    std::optional<std::size_t> pebble;
    if (move.contains("pebble") && !move["pebble"].is_null()) {
      if (!move["pebble"].is_number_integer() || move["pebble"].get<long long>() < 0)
        throw BadRequest("'pebble' must be a non-negative integer");
      pebble = move["pebble"].get<std::size_t>();
    }
    const std::size_t size = side == Side::A ? cfg_.left.size() : cfg_.right.size();
    if (element < 0 || static_cast<std::size_t>(element) >= size)
      throw BadRequest("element " + std::to_string(element) + " is out of range for structure " + to_string(side));

    if (cfg_.human == Player::Spoiler) {
      SpoilerMove m{side, 0, element};
      if (cfg_.ef) {
        m.pebble = next_ef_slot();
        if (pebble && *pebble != m.pebble)
          throw BadRequest("bad pebble index: the next EF move uses slot " + std::to_string(m.pebble));
      } else {
        if (!pebble) throw BadRequest("pebble games need a 'pebble' index");
        if (*pebble >= cfg_.s) throw BadRequest("bad pebble index " + std::to_string(*pebble));
        m.pebble = *pebble;
      }
      auto h = optimal_move(*solver_, pos_, left_, m);
      Element reply = *h.reply;
      if (!h.winning) {
        // Lost anyway; keep the game alive as long as a legal answer exists.
        for (std::size_t e = 0; e < solver_->reply_range(m); ++e)
          if (solver_->move_ok(pos_, m, static_cast<Element>(e))) {
            reply = static_cast<Element>(e);
            break;
          }
      }
      last_engine_ = json{{"reply", reply}, {"structure", m.side == Side::A ? "B" : "A"}, {"pebble", m.pebble}};
      apply(m, reply, Player::Spoiler);
    } else {
      const SpoilerMove& m = *pending_;
      if (side == m.side) throw BadRequest("wrong side: Duplicator answers in the other structure");
      if (pebble && *pebble != m.pebble) throw BadRequest("bad pebble index: the pending pebble is " + std::to_string(m.pebble));
      apply(m, element, Player::Duplicator);
      if (status_ == Status::Ongoing) engine_spoiler();
    }
    publish();
    return *snapshot_;
  }

  json hint() {
    std::lock_guard lock(mu_);
    if (status_ != Status::Ongoing) throw GameOver("the game is over (" + std::string(to_string(status_)) + ")");
    if (cfg_.human == Player::Spoiler) {
      auto h = optimal_move(*solver_, pos_, left_);
      return {{"move", detail::move_to_json(*h.spoiler)}, {"winning", h.winning}};
    }
    const SpoilerMove& m = *pending_;
    auto h = optimal_move(*solver_, pos_, left_, m);
    Element reply = *h.reply;
    if (!h.winning)
      for (std::size_t e = 0; e < solver_->reply_range(m); ++e)
        if (solver_->move_ok(pos_, m, static_cast<Element>(e))) {
          reply = static_cast<Element>(e);
          break;
        }
    json mv = {{"structure", m.side == Side::A ? "B" : "A"}, {"pebble", m.pebble}, {"element", reply}};
    return {{"move", mv}, {"winning", h.winning}};
  }

  Status status() const { return status_.load(); }

  void touch(std::chrono::steady_clock::time_point t) { last_used_.store(t.time_since_epoch().count()); }
  std::chrono::steady_clock::time_point last_used() const {
    return std::chrono::steady_clock::time_point(std::chrono::steady_clock::duration(last_used_.load()));
  }

private:
  std::size_t next_ef_slot() const {
    for (std::size_t i = cfg_.left_tuple.size(); i < pos_.left.size(); ++i)
      if (pos_.left[i] == kStar) return i;
    throw GameOver("no EF moves left");
  }

  void engine_spoiler() {
    auto h = optimal_move(*solver_, pos_, left_);
    pending_ = *h.spoiler;
    last_engine_ = detail::move_to_json(*pending_);
  }

  void apply(const SpoilerMove& m, Element reply, Player human) {
    bool ok = solver_->move_ok(pos_, m, reply);
    pos_ = solver_->after(pos_, m, reply);
    history_.push_back({m, reply, human});
    pending_.reset();
    if (left_) --*left_;
    if (!ok) finish(Player::Spoiler);
    else if (left_ && *left_ == 0) finish(Player::Duplicator);
  }

  void finish(Player winner) { status_ = winner == cfg_.human ? Status::HumanWon : Status::EngineWon; }

  void publish() {
    json hist = json::array();
    for (const auto& h : history_)
      hist.push_back({{"spoiler", detail::move_to_json(h.spoiler)},
                      {"reply", h.reply},
                      {"human", h.human == Player::Spoiler ? "spoiler" : "duplicator"}});
    auto v = std::make_shared<json>(json{
        {"id", id_},
        {"kind", cfg_.ef ? "ef" : "pebble"},
        {"humanSide", cfg_.human == Player::Spoiler ? "spoiler" : "duplicator"},
        {"pebbles", {{"left", pebbles_to_json(pos_.left)}, {"right", pebbles_to_json(pos_.right)}}},
        {"history", hist},
        {"movesLeft", left_ ? json(*left_) : json(nullptr)},
        {"status", to_string(status_)},
        {"lastEngineMove", last_engine_},
        {"pendingSpoilerMove", pending_ ? detail::move_to_json(*pending_) : json(nullptr)}});
    std::atomic_store(&snapshot_, std::shared_ptr<const json>(std::move(v)));
  }

  std::string id_;
  SessionConfig cfg_;
  std::shared_ptr<GameSolver> solver_;
  Position pos_;
  Rounds left_;
  std::optional<SpoilerMove> pending_;
  std::vector<HistoryEntry> history_;
  json last_engine_ = nullptr;
  std::atomic<Status> status_{Status::Ongoing};
  std::mutex mu_;
  std::shared_ptr<const json> snapshot_;
  std::atomic<std::chrono::steady_clock::rep> last_used_{0};
};

/// In-memory session table with idle expiry.
class SessionManager {
public:
  using Clock = std::chrono::steady_clock;

  struct Options {
    std::chrono::seconds idle_timeout{1800};
    std::size_t solver_bound = 4'000'000;
    std::size_t max_sessions = 1000;
    std::function<Clock::time_point()> now = [] { return Clock::now(); };
  };

  SessionManager() : SessionManager(Options{}) {}
  explicit SessionManager(Options opt) : opt_(std::move(opt)) {}

  json create(const json& config) {
    expire();
    auto cfg = config_from_json(config);
    std::string id;
    {
      std::shared_lock lock(mu_);
      if (sessions_.size() >= opt_.max_sessions) throw Error("too many open sessions");
    }
    id = "s" + std::to_string(++counter_);
    auto s = std::make_shared<Session>(id, std::move(cfg), opt_.solver_bound);
    s->touch(opt_.now());
    {
      std::unique_lock lock(mu_);
      sessions_[id] = s;
    }
    return {{"id", id}, {"view", *s->view()}};
  }

  json get(const std::string& id) { return *find(id)->view(); }
  json play(const std::string& id, const json& move) { return find(id)->play(move); }
  json hint(const std::string& id) { return find(id)->hint(); }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return sessions_.size();
  }

  /// Drops sessions idle longer than the timeout; returns how many went.
  std::size_t expire() {
    auto now = opt_.now();
    std::unique_lock lock(mu_);
    std::size_t gone = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (now - it->second->last_used() > opt_.idle_timeout) {
        it = sessions_.erase(it);
        ++gone;
      } else {
        ++it;
      }
    }
    return gone;
  }

private:
  std::shared_ptr<Session> find(const std::string& id) {
    expire();
    std::shared_ptr<Session> s;
    {
      std::shared_lock lock(mu_);
      auto it = sessions_.find(id);
      if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
      s = it->second;
    }
    s->touch(opt_.now());
    return s;
  }

  Options opt_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::atomic<std::uint64_t> counter_{0};
};

} // namespace fmw::service
