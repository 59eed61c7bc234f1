#pragma once

#include <string>

#include "httplib.h"
#include "waydirector/api.hpp"

namespace waydirector::api {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;            // 0 picks a free port
  std::string cors_origin = "*";  // empty disables CORS headers
};

class HttpServer {
 public:
  HttpServer(Service& service, ServerConfig config) : service_(service), config_(std::move(config)) {
    if (config_.port < 0 || config_.port > 65535) throw ConfigError("port must be in 1..65535");
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      const Response r = service_.handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json; charset=utf-8");
    };
    server_.Get(".*", forward);
    server_.Post(".*", forward);
    server_.Put(".*", forward);
    server_.Delete(".*", forward);
    server_.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server_.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      if (config_.cors_origin.empty()) return;
      res.set_header("Access-Control-Allow-Origin", config_.cors_origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    server_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      res.status = 500;
      res.set_content(R"({"code":"internal","message":"internal error"})", "application/json; charset=utf-8");
    });
  }

  // Binds and returns the port actually used.
  int bind() {
    if (config_.port == 0) {
      port_ = server_.bind_to_any_port(config_.host);
    } else if (server_.bind_to_port(config_.host, config_.port)) {
      port_ = config_.port;
    } else {
      port_ = -1;
    }
    if (port_ <= 0) throw ConfigError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    return port_;
  }

  // Blocks until stop().
  bool run() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  int port() const { return port_; }

 private:
  Service& service_;
  ServerConfig config_;
  httplib::Server server_;
  int port_ = -1;
};

}  // namespace waydirector::api
