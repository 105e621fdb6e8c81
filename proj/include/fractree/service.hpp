#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "fractree/design.hpp"

namespace fractree {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;
  RequestCaps caps;
};

// Stateless JSON/SVG service over HTTP/1.1. Every handler builds its design
// from the request alone, so requests run concurrently without shared state.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the socket; returns the bound port or -1.
  int bind();
  // Serves until stop(); in-flight requests finish before it returns.
  bool run();
  void stop();
  void wait_until_ready() const;
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ServiceOptions options_;
  int port_ = -1;
};

}  // namespace fractree
