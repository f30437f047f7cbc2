#include <thread>

#include <httplib.h>

#include "divex/service.hpp"

namespace divex {

struct HttpServer::Impl {
  std::shared_ptr<const Api> api;
  httplib::Server server;
  std::thread thread;
};

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_header("Access-Control-Allow-Origin", "*");
  res.set_header("Cache-Control", "no-store");
  res.set_content(r.body, r.contentType);
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<const Api> api, const BindAddress& bind) : impl_(std::make_unique<Impl>()) {
  impl_->api = std::move(api);
  auto& srv = impl_->server;
  const auto* handler = impl_->api.get();

  srv.Get(".*", [handler](const httplib::Request& req, httplib::Response& res) {
    send(res, handler->handle(req.path, req.params));
  });
  auto reject = [](const httplib::Request& req, httplib::Response& res) {
    send(res, {404, "application/json",
               ApiError{404, "not_found", "read-only API: " + req.method + " is not served", {}}.body()});
  };
  srv.Post(".*", reject);
  srv.Put(".*", reject);
  srv.Patch(".*", reject);
  srv.Delete(".*", reject);
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send(res, {500, "application/json", ApiError{500, "internal_error", "internal error", {}}.body()});
  });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const int status = res.status == 404 || res.status == 409 || res.status == 500 ? res.status : 400;
    const auto code = status == 404 ? "not_found" : status == 400 ? "invalid_parameter" : "internal_error";
    send(res, {status, "application/json", ApiError{status, code, "request rejected", {}}.body()});
  });

  srv.set_tcp_nodelay(true);
  // SO_REUSEADDR only, never SO_REUSEPORT
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  if (bind.port == 0) {
    port_ = srv.bind_to_any_port(bind.host);
    if (port_ <= 0) fail(ErrorCode::Bind, "cannot bind " + bind.host + " on any port");
  } else {
    if (!srv.bind_to_port(bind.host, bind.port)) {
      fail(ErrorCode::Bind, "cannot bind " + bind.host + ":" + std::to_string(bind.port));
    }
    port_ = bind.port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  srv.wait_until_ready();
}

HttpServer::~HttpServer() {
  stop();
  wait();
}

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace divex
