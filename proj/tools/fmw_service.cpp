#include <iostream>

#include "CLI11.hpp"
#include "service_http.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Game session service", "fmw-service"};
  std::string host = "127.0.0.1";
  int port = 8080;
  long idle = 1800;
  std::size_t bound = 4'000'000;
  app.add_option("--host", host);
  app.add_option("--port", port);
  app.add_option("--idle-timeout", idle, "Seconds before an idle session is dropped");
  app.add_option("--bound", bound, "Largest pebble position space a session may precompute");
  CLI11_PARSE(app, argc, argv);

  fmw::service::SessionManager::Options opt;
  opt.idle_timeout = std::chrono::seconds(idle);
  opt.solver_bound = bound;
  fmw::service::SessionManager mgr(opt);
  httplib::Server srv;
  fmw::service::register_routes(srv, mgr);
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!srv.listen(host, port)) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return 1;
  }
}
