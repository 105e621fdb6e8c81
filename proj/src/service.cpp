#include "fractree/service.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

#include "httplib.h"

#include "fractree/error.hpp"
#include "fractree/export.hpp"

namespace fractree {

using nlohmann::json;

namespace {

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const std::string& field) {
  res.status = status;
  json body = {{"code", code}, {"message", message}, {"field", field.empty() ? json(nullptr) : json(field)}};
  res.set_content(body.dump(), "application/json");
}

int status_for(const Error& e) {
  if (e.code() == "invalid_type") return 400;
  if (e.code() == "invalid_geometry") return 500;
  return 422;
}

// Runs `fn`, mapping library errors onto HTTP statuses and timing the work.
void guarded(httplib::Response& res, const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fn();
  } catch (const json::parse_error& e) {
    send_error(res, 400, "malformed_json", e.what(), "");
  } catch (const json::exception& e) {
    send_error(res, 400, "invalid_type", e.what(), "");
  } catch (const Error& e) {
    send_error(res, status_for(e), e.code(), e.what(), e.field());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what(), "");
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", ms);
  res.set_header("X-Elapsed-Ms", buf);
}

std::multimap<std::string, std::string> query_of(const httplib::Request& req) {
  return {req.params.begin(), req.params.end()};
}

}  // namespace

struct Service::Impl {
  httplib::Server server;
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>()), options_(std::move(options)) {
  auto& srv = impl_->server;
  const RequestCaps caps = options_.caps;

  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

  srv.Get("/api/defaults", [](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json j = request_to_json(DesignRequest{});
      j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
      res.set_content(canonical_numbers(j).dump(), "application/json");
    });
  });

  srv.Post("/api/evaluate", [caps](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto request = request_from_json(json::parse(req.body), &caps);
      res.set_content(evaluate_json(run_design(request)).dump(), "application/json");
    });
  });

  srv.Post("/api/geometry", [caps](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto request = request_from_json(json::parse(req.body), &caps);
      res.set_content(geometry_json(prepare_design(request)).dump(), "application/json");
    });
  });

  srv.Get("/api/svg/preview", [caps](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Design d = prepare_design(request_from_query(query_of(req), &caps));
      const auto palette = default_palette(static_cast<int>(d.stack.layers.size()));
      res.set_content(export_svg_preview(d.stack, palette, d.material.scale_mm_per_unit), "image/svg+xml");
    });
  });

  srv.Get(R"(/api/svg/cut/(\d+))", [caps](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Design d = prepare_design(request_from_query(query_of(req), &caps));
      const long long i = std::stoll(req.matches[1].str());
      if (i < 0 || i >= static_cast<long long>(d.stack.layers.size()))
        throw DomainError("layer", "layer index out of range");
      res.set_content(export_svg_cut(d.stack.layers[static_cast<std::size_t>(i)], d.stack.plate_radius, d.material),
                      "image/svg+xml");
    });
  });

  srv.Get("/api/manifest", [caps](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      res.set_content(export_manifest(run_design(request_from_query(query_of(req), &caps))), "application/json");
    });
  });

  if (options_.static_dir) {
    if (!srv.set_mount_point("/", options_.static_dir->string()))
      throw Error("io_error", "static directory not found: " + options_.static_dir->string(), "static");
  }
}

Service::~Service() { stop(); }

int Service::bind() {
  auto& srv = impl_->server;
  if (options_.port == 0) {
    port_ = srv.bind_to_any_port(options_.host);
  } else {
    port_ = srv.bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  return port_;
}

bool Service::run() {
  if (port_ < 0 && bind() < 0) return false;
  return impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace fractree
