#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "oed/annotator/session.hpp"

namespace oed::annotator {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// JSON front of the annotation sessions, independent of any HTTP library:
///   POST /sessions                {dataset, mode, reviewers_required, ...}
///   GET  /sessions/:id/next
///   POST /sessions/:id/submit     {task_token, labels, reviewer}
///   GET  /sessions/:id/status
///   GET  /sessions/:id/export     JSONL
/// Errors come back as {"error": code, "message": text} with a 4xx/5xx status.
class AnnotationService {
 public:
  using RetrainerFactory = std::function<Retrainer(const corpus::Dataset&)>;

  struct Options {
    /// Builds the retrainer of a new session; the Bi-LSTM retrainer by default.
    RetrainerFactory retrainer;
    Clock clock;
  };

  AnnotationService();
  explicit AnnotationService(Options options);

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  /// Creates a session directly; returns its id.
  std::string create_session(corpus::Dataset dataset, SessionOptions options);
  std::shared_ptr<AnnotationSession> session(const std::string& id) const;

 private:
  HttpResponse create_from_json(const std::string& body);

  Options options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<AnnotationSession>> sessions_;
  std::size_t next_id_ = 1;
};

/// HTTP transport for an AnnotationService.
class HttpServer {
 public:
  explicit HttpServer(AnnotationService& service);
  ~HttpServer();

  /// Binds the listening socket; port 0 picks a free port. Returns the bound
  /// port, or -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves requests until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace oed::annotator
