#pragma once

#include <string>

#include "httplib.h"

#include "fmw/service.hpp"

namespace fmw::service {

namespace detail {

inline void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    reply_json(res, 200, f());
  } catch (const NotFound& e) {
    reply_json(res, 404, {{"error", e.what()}});
  } catch (const GameOver& e) {
    reply_json(res, 409, {{"error", e.what()}});
  } catch (const BoundExceeded& e) {
    reply_json(res, 422, {{"error", e.what()}});
  } catch (const std::exception& e) {
    // BadRequest, malformed JSON, invalid structures.
    reply_json(res, 400, {{"error", e.what()}});
  }
}

inline json body_json(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw BadRequest(std::string("request body is not JSON: ") + e.what());
  }
}

} // namespace detail

inline void register_routes(httplib::Server& srv, SessionManager& mgr) {
  srv.Post("/sessions", [&mgr](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return mgr.create(detail::body_json(req)); });
  });
  srv.Get(R"(/sessions/([A-Za-z0-9]+))", [&mgr](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return mgr.get(req.matches[1]); });
  });
  srv.Post(R"(/sessions/([A-Za-z0-9]+)/moves)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return mgr.play(req.matches[1], detail::body_json(req)); });
  });
  srv.Get(R"(/sessions/([A-Za-z0-9]+)/hint)", [&mgr](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return mgr.hint(req.matches[1]); });
  });
}

} // namespace fmw::service
