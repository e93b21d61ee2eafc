// geogp-server: HTTP front end for demonstrate / prompt / predict sessions.
#include "geogp/error.hpp"
#include "geogp/http_api.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <filesystem>
#include <iostream>

namespace {
httplib::Server* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GeoGP session server"};
  std::string host = "127.0.0.1", library_dir;
  int port = 8080;
  std::size_t capacity = 64;
  int window = 10;
  double rate = 20.0;
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  app.add_option("--capacity", capacity, "Maximum open sessions")->check(CLI::PositiveNumber);
  app.add_option("--library", library_dir, "Skill library directory (loaded and kept saved)");
  app.add_option("--window", window, "Window length w")->check(CLI::PositiveNumber);
  app.add_option("--rate", rate, "Resampling rate in Hz")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    geogp::SessionOptions opts;
    opts.capacity = capacity;
    opts.config.window = window;
    opts.config.sample_rate_hz = rate;
    auto library = std::make_shared<geogp::SharedLibrary>();
    geogp::HttpApiOptions api;
    if (!library_dir.empty()) {
      api.library_dir = library_dir;
      if (std::filesystem::exists(std::filesystem::path(library_dir) / "manifest.json")) {
        library = std::make_shared<geogp::SharedLibrary>(geogp::load_library(library_dir));
        std::cerr << "loaded " << library->size() << " skills from " << library_dir << "\n";
      }
    }
    geogp::SessionManager sessions(opts, library);

    httplib::Server server;
    geogp::install_routes(server, sessions, api);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    if (port == 0) {
      port = server.bind_to_any_port(host);
    } else if (!server.bind_to_port(host, port)) {
      port = -1;
    }
    if (port < 0) {
      std::cerr << "error: cannot bind " << host << "\n";
      return 1;
    }
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    server.listen_after_bind();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
