#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "oed/common/error.hpp"
#include "oed/common/rng.hpp"
#include "oed/corpus/dataset.hpp"

namespace oed::annotator {

enum class Mode { kAssisted, kBlind };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& name);

/// Failure of a session call, with a stable machine-readable code.
class SessionError : public Error {
 public:
  SessionError(std::string code, const std::string& message) : Error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Read-only model used to pre-label sentences.
class SuggestionModel {
 public:
  virtual ~SuggestionModel() = default;
  /// One probability per token.
  virtual std::vector<double> suggest(const corpus::Sentence& sentence) const = 0;
};

struct RetrainRequest {
  /// Every committed sentence so far, labels included.
  std::vector<corpus::Sentence> pool;
  std::uint64_t seed = 1;
  /// 1 for the first retrain, 2 for the second, ...
  std::uint64_t generation = 0;
};

using Retrainer = std::function<std::shared_ptr<const SuggestionModel>(const RetrainRequest&)>;
using Clock = std::function<std::chrono::steady_clock::time_point()>;

struct SessionOptions {
  Mode mode = Mode::kAssisted;
  int reviewers_required = 1;
  int batch_trigger = 50;
  std::chrono::seconds token_ttl{3600};
  /// Queue order is dataset order unless a shuffle seed is given.
  std::optional<std::uint64_t> shuffle_seed;
  /// Seed handed to every retrain.
  std::uint64_t seed = 1;
};

struct SentenceTask {
  std::string token;
  corpus::Sentence sentence;
  /// Absent in blind mode and before the first model exists.
  std::optional<std::vector<double>> suggestions;
  /// The sentence came back after conflicting submissions.
  bool rereview = false;
};

/// next_task result when nothing is left to hand out.
struct SessionComplete {
  /// Sentences still waiting for outstanding reviews.
  std::size_t pending = 0;
};

struct LabelSubmission {
  std::string token;
  std::vector<int> labels;
  std::string reviewer;
};

enum class SubmitStatus { kAwaitingConsensus, kCommitted, kRetrainStarted, kRequeued };
std::string to_string(SubmitStatus s);

struct SubmitResult {
  SubmitStatus status;
  std::size_t committed = 0;
  int since_last_retrain = 0;
};

struct SessionStatus {
  Mode mode = Mode::kAssisted;
  int reviewers_required = 1;
  int batch_trigger = 50;
  std::size_t total = 0;
  std::size_t queued = 0;
  std::size_t in_review = 0;
  std::size_t committed = 0;
  int since_last_retrain = 0;
  std::size_t retrains_started = 0;
  std::size_t retrains_completed = 0;
  std::size_t retrains_failed = 0;
  bool retrain_running = false;
  bool has_model = false;
  std::string last_error;
  bool complete = false;
};

/// One annotation run over a dataset: hands out sentences, collects reviewer
/// labels until the required number agree, and retrains the suggestion model
/// on the whole labeled pool every `batch_trigger` commits. Retraining runs on
/// a background thread; the new model replaces the old one in a single swap.
class AnnotationSession {
 public:
  AnnotationSession(std::string id, corpus::Dataset dataset, SessionOptions options, Retrainer retrainer,
                    Clock clock = {});
  ~AnnotationSession();
  AnnotationSession(const AnnotationSession&) = delete;
  AnnotationSession& operator=(const AnnotationSession&) = delete;

  const std::string& id() const { return id_; }
  const SessionOptions& options() const { return options_; }

  std::variant<SentenceTask, SessionComplete> next_task();
  /// Throws SessionError with code "invalid_token", "token_replay",
  /// "token_expired", "label_length", "bad_label" or "duplicate_reviewer".
  SubmitResult submit(const LabelSubmission& submission);
  SessionStatus status() const;
  /// Committed sentences as JSONL in commit order.
  std::string export_jsonl() const;
  /// Blocks until queued retrains have finished.
  void wait_idle();

 private:
  struct Item {
    std::size_t index = 0;
    bool rereview = false;
    std::size_t outstanding = 0;
    std::map<std::string, std::vector<int>> submissions;
  };
  struct Ticket {
    std::size_t index;
    std::chrono::steady_clock::time_point expires;
  };

  std::string fresh_token();
  void expire_tokens(std::chrono::steady_clock::time_point now);
  void schedule_retrain();
  void worker_loop();

  const std::string id_;
  const corpus::Dataset dataset_;
  const SessionOptions options_;
  Retrainer retrainer_;
  Clock clock_;

  mutable std::mutex mu_;
  std::deque<std::size_t> queue_;
  std::set<std::size_t> rereview_;
  std::map<std::size_t, Item> open_;
  std::map<std::string, Ticket> tickets_;
  std::set<std::string> spent_;
  std::set<std::string> expired_;
  std::vector<corpus::Sentence> pool_;
  int since_last_retrain_ = 0;
  std::size_t retrains_started_ = 0;
  std::size_t retrains_completed_ = 0;
  std::size_t retrains_failed_ = 0;
  std::string last_error_;
  Rng token_rng_;

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const SuggestionModel> snapshot_;

  mutable std::mutex work_mu_;
  std::condition_variable work_cv_;
  std::deque<RetrainRequest> work_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace oed::annotator
