#include "oed/annotator/service.hpp"

#include <json.hpp>

#include "oed/annotator/retrain.hpp"

namespace oed::annotator {

using nlohmann::json;

namespace {

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
  return {status, json{{"error", code}, {"message", message}}.dump(), "application/json"};
}

HttpResponse ok(int status, const json& body) { return {status, body.dump(), "application/json"}; }

int status_for(const std::string& code) {
  if (code == "token_replay" || code == "duplicate_reviewer") return 409;
  if (code == "token_expired") return 410;
  return 400;
}

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::string current;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

json task_json(const SentenceTask& task) {
  json tokens = json::array();
  for (const auto& t : task.sentence.tokens) tokens.push_back(t.text);
  json j = {{"status", "task"},
            {"task_token", task.token},
            {"sentence", {{"id", task.sentence.id}, {"tokens", tokens}}},
            {"rereview", task.rereview}};
  if (task.suggestions) j["suggestions"] = *task.suggestions;
  return j;
}

json status_json(const std::string& id, const SessionStatus& s) {
  return {{"id", id},
          {"mode", to_string(s.mode)},
          {"reviewers_required", s.reviewers_required},
          {"batch_trigger", s.batch_trigger},
          {"total", s.total},
          {"queued", s.queued},
          {"in_review", s.in_review},
          {"committed", s.committed},
          {"since_last_retrain", s.since_last_retrain},
          {"until_next_retrain", s.batch_trigger - s.since_last_retrain},
          {"retrains_started", s.retrains_started},
          {"retrains_completed", s.retrains_completed},
          {"retrains_failed", s.retrains_failed},
          {"retrain_running", s.retrain_running},
          {"has_model", s.has_model},
          {"last_error", s.last_error},
          {"complete", s.complete}};
}

}  // namespace

AnnotationService::AnnotationService() : AnnotationService(Options{}) {}

AnnotationService::AnnotationService(Options options) : options_(std::move(options)) {
  if (!options_.retrainer) {
    options_.retrainer = [](const corpus::Dataset& d) { return make_rnn_retrainer(d); };
  }
}

std::string AnnotationService::create_session(corpus::Dataset dataset, SessionOptions options) {
  auto retrainer = options_.retrainer(dataset);
  std::lock_guard lock(mu_);
  const std::string id = "s" + std::to_string(next_id_++);
  sessions_[id] = std::make_shared<AnnotationSession>(id, std::move(dataset), options, std::move(retrainer),
                                                      options_.clock);
  return id;
}

std::shared_ptr<AnnotationSession> AnnotationService::session(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

HttpResponse AnnotationService::create_from_json(const std::string& body) {
  const json j = json::parse(body);
  if (!j.is_object()) return error_response(400, "bad_request", "body must be a JSON object");
  static const std::set<std::string> known{"dataset",      "mode", "reviewers_required", "batch_trigger",
                                           "shuffle_seed", "seed", "token_ttl_seconds"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) return error_response(400, "bad_request", "unknown field \"" + key + "\"");
  }
  if (!j.contains("dataset")) return error_response(400, "bad_request", "field \"dataset\" is required");
  SessionOptions opts;
  opts.mode = mode_from_string(j.value("mode", std::string("assisted")));
  opts.reviewers_required = j.value("reviewers_required", 1);
  opts.batch_trigger = j.value("batch_trigger", 50);
  if (j.contains("shuffle_seed")) opts.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
  opts.seed = j.value("seed", std::uint64_t{1});
  opts.token_ttl = std::chrono::seconds(j.value("token_ttl_seconds", 3600));

  const std::string path = j.at("dataset").get<std::string>();
  corpus::Dataset dataset;
  try {
    dataset = corpus::load_dataset(path);
  } catch (const Error& e) {
    return error_response(400, "bad_dataset", e.what());
  }
  const std::string id = create_session(std::move(dataset), opts);
  auto s = session(id)->status();
  return ok(201, {{"id", id}, {"mode", to_string(s.mode)}, {"reviewers_required", s.reviewers_required},
                  {"batch_trigger", s.batch_trigger}, {"total", s.total}});
}

HttpResponse AnnotationService::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    const auto parts = segments(path);
    if (parts.empty() || parts[0] != "sessions") return error_response(404, "not_found", "no route for " + path);
    if (parts.size() == 1) {
      if (method != "POST") return error_response(405, "method_not_allowed", method + " " + path);
      return create_from_json(body);
    }
    if (parts.size() != 3) return error_response(404, "not_found", "no route for " + path);
    auto s = session(parts[1]);
    if (!s) return error_response(404, "unknown_session", "no session \"" + parts[1] + "\"");
    const std::string& action = parts[2];

    if (action == "next" || action == "status" || action == "export") {
      if (method != "GET") return error_response(405, "method_not_allowed", method + " " + path);
    } else if (action == "submit") {
      if (method != "POST") return error_response(405, "method_not_allowed", method + " " + path);
    } else {
      return error_response(404, "not_found", "no route for " + path);
    }

    if (action == "next") {
      auto next = s->next_task();
      if (auto* done = std::get_if<SessionComplete>(&next)) {
        return ok(200, {{"status", "complete"}, {"pending", done->pending}});
      }
      return ok(200, task_json(std::get<SentenceTask>(next)));
    }
    if (action == "status") return ok(200, status_json(s->id(), s->status()));
    if (action == "export") return {200, s->export_jsonl(), "application/x-ndjson"};

    const json j = json::parse(body);
    if (!j.is_object() || !j.contains("task_token") || !j.contains("labels")) {
      return error_response(400, "bad_request", "submission needs task_token and labels");
    }
    LabelSubmission sub;
    sub.token = j.at("task_token").get<std::string>();
    sub.labels = j.at("labels").get<std::vector<int>>();
    sub.reviewer = j.value("reviewer", std::string("anonymous"));
    const auto result = s->submit(sub);
    return ok(200, {{"status", to_string(result.status)},
                    {"requeued", result.status == SubmitStatus::kRequeued},
                    {"committed", result.committed},
                    {"since_last_retrain", result.since_last_retrain}});
  } catch (const SessionError& e) {
    return error_response(status_for(e.code()), e.code(), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const UsageError& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

}  // namespace oed::annotator
