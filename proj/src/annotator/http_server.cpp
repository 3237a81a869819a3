#include <httplib.h>

#include "oed/annotator/service.hpp"

namespace oed::annotator {

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(AnnotationService& service) : impl_(std::make_unique<Impl>()) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto out = service.handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  impl_->server.Get(".*", forward);
  impl_->server.Post(".*", forward);
  impl_->server.Put(".*", forward);
  impl_->server.Delete(".*", forward);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace oed::annotator
