#include <httplib.h>

#include "llmroi/errors.hpp"
#include "llmroi/service.hpp"

namespace llmroi {

struct HttpServer::Impl {
  Service& service;
  std::string host;
  int port;
  bool bound = false;
  httplib::Server server;

  Impl(Service& s, std::string h, int p) : service(s), host(std::move(h)), port(p) {
    const std::string origin = service.config().cors_origin;
    server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      const auto out = service.handle(req.method, req.path, req.body);
      res.status = out.status;
      res.set_content(out.body, "application/json");
    };
    server.Get(R"(/.*)", forward);
    server.Post(R"(/.*)", forward);
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
  }
};

HttpServer::HttpServer(Service& service, std::string host, int port)
    : impl_(std::make_unique<Impl>(service, std::move(host), port)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (impl_->bound) return impl_->port;
  if (impl_->port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->host);
    if (impl_->port < 0) throw Error("io_error", "cannot bind " + impl_->host);
  } else if (!impl_->server.bind_to_port(impl_->host, impl_->port)) {
    throw Error("io_error",
                "cannot bind " + impl_->host + ":" + std::to_string(impl_->port));
  }
  impl_->bound = true;
  return impl_->port;
}

void HttpServer::run() {
  bind();
  impl_->server.listen_after_bind();
}

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace llmroi
