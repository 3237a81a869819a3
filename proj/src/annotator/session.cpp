#include "oed/annotator/session.hpp"

#include <random>

#include "oed/common/hash.hpp"

namespace oed::annotator {

std::string to_string(Mode m) { return m == Mode::kAssisted ? "assisted" : "blind"; }

Mode mode_from_string(const std::string& name) {
  if (name == "assisted") return Mode::kAssisted;
  if (name == "blind") return Mode::kBlind;
  throw UsageError("mode must be \"assisted\" or \"blind\", got \"" + name + "\"");
}

std::string to_string(SubmitStatus s) {
  switch (s) {
    case SubmitStatus::kAwaitingConsensus: return "awaiting_consensus";
    case SubmitStatus::kCommitted: return "committed";
    case SubmitStatus::kRetrainStarted: return "retrain_started";
    case SubmitStatus::kRequeued: return "accepted";
  }
  return "?";
}

AnnotationSession::AnnotationSession(std::string id, corpus::Dataset dataset, SessionOptions options,
                                     Retrainer retrainer, Clock clock)
    : id_(std::move(id)),
      dataset_(std::move(dataset)),
      options_(options),
      retrainer_(std::move(retrainer)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      token_rng_(std::random_device{}() ^ (static_cast<std::uint64_t>(std::random_device{}()) << 32)) {
  if (options_.reviewers_required < 1) throw UsageError("reviewers_required must be at least 1");
  if (options_.batch_trigger < 1) throw UsageError("batch_trigger must be at least 1");
  if (options_.token_ttl.count() <= 0) throw UsageError("token lifetime must be positive");
  std::vector<std::size_t> order(dataset_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (options_.shuffle_seed) Rng(*options_.shuffle_seed).shuffle(std::span<std::size_t>(order));
  queue_.assign(order.begin(), order.end());
  worker_ = std::thread([this] { worker_loop(); });
}

AnnotationSession::~AnnotationSession() {
  {
    std::lock_guard lock(work_mu_);
    stopping_ = true;
  }
  work_cv_.notify_all();
  worker_.join();
}

std::string AnnotationSession::fresh_token() {
  std::string token;
  do {
    token = to_hex(token_rng_.next_u64()) + to_hex(token_rng_.next_u64());
  } while (tickets_.count(token) || spent_.count(token));
  return token;
}

void AnnotationSession::expire_tokens(std::chrono::steady_clock::time_point now) {
  for (auto it = tickets_.begin(); it != tickets_.end();) {
    if (it->second.expires <= now) {
      if (auto item = open_.find(it->second.index); item != open_.end() && item->second.outstanding > 0) {
        --item->second.outstanding;
      }
      expired_.insert(it->first);
      it = tickets_.erase(it);
    } else {
      ++it;
    }
  }
}

std::variant<SentenceTask, SessionComplete> AnnotationSession::next_task() {
  // One snapshot per task, so a concurrent swap never mixes two models.
  std::shared_ptr<const SuggestionModel> model;
  {
    std::lock_guard lock(snapshot_mu_);
    model = snapshot_;
  }
  SentenceTask task;
  {
    std::lock_guard lock(mu_);
    const auto now = clock_();
    expire_tokens(now);

    const auto required = static_cast<std::size_t>(options_.reviewers_required);
    Item* chosen = nullptr;
    for (auto& [index, item] : open_) {
      if (item.outstanding + item.submissions.size() < required) {
        chosen = &item;
        break;
      }
    }
    if (!chosen && !queue_.empty()) {
      const std::size_t index = queue_.front();
      queue_.pop_front();
      Item item;
      item.index = index;
      item.rereview = rereview_.count(index) > 0;
      chosen = &open_.emplace(index, std::move(item)).first->second;
    }
    if (!chosen) return SessionComplete{open_.size()};

    ++chosen->outstanding;
    task.token = fresh_token();
    tickets_[task.token] = Ticket{chosen->index, now + options_.token_ttl};
    task.sentence = dataset_.sentences[chosen->index];
    task.rereview = chosen->rereview;
  }
  if (options_.mode == Mode::kAssisted && model) {
    auto p = model->suggest(task.sentence);
    if (p.size() != task.sentence.size()) {
      throw Error("suggestion model returned " + std::to_string(p.size()) + " values for " +
                  std::to_string(task.sentence.size()) + " tokens");
    }
    task.suggestions = std::move(p);
  }
  return task;
}

SubmitResult AnnotationSession::submit(const LabelSubmission& submission) {
  std::lock_guard lock(mu_);
  const auto now = clock_();
  auto ticket = tickets_.find(submission.token);
  if (ticket == tickets_.end()) {
    if (spent_.count(submission.token)) throw SessionError("token_replay", "task token was already used");
    if (expired_.count(submission.token)) throw SessionError("token_expired", "task token has expired");
    throw SessionError("invalid_token", "unknown task token");
  }
  if (ticket->second.expires <= now) {
    expire_tokens(now);
    throw SessionError("token_expired", "task token has expired");
  }
  Item& item = open_.at(ticket->second.index);
  const auto& sentence = dataset_.sentences[item.index];
  if (submission.labels.size() != sentence.size()) {
    throw SessionError("label_length", "expected " + std::to_string(sentence.size()) + " labels, got " +
                                           std::to_string(submission.labels.size()));
  }
  for (int l : submission.labels) {
    if (l != 0 && l != 1) throw SessionError("bad_label", "labels must be 0 or 1");
  }
  if (item.submissions.count(submission.reviewer)) {
    throw SessionError("duplicate_reviewer", "reviewer \"" + submission.reviewer + "\" already labeled this sentence");
  }

  tickets_.erase(ticket);
  spent_.insert(submission.token);
  --item.outstanding;
  item.submissions.emplace(submission.reviewer, submission.labels);

  SubmitResult result{SubmitStatus::kAwaitingConsensus, pool_.size(), since_last_retrain_};
  if (item.submissions.size() < static_cast<std::size_t>(options_.reviewers_required)) return result;

  const auto& first = item.submissions.begin()->second;
  bool agree = true;
  for (const auto& [reviewer, labels] : item.submissions) agree = agree && labels == first;
  if (!agree) {
    // Outstanding tokens for this sentence are void; everyone reviews it afresh.
    for (auto it = tickets_.begin(); it != tickets_.end();) {
      it = it->second.index == item.index ? tickets_.erase(it) : std::next(it);
    }
    rereview_.insert(item.index);
    queue_.push_front(item.index);
    open_.erase(item.index);
    result.status = SubmitStatus::kRequeued;
    return result;
  }

  corpus::Sentence labeled = sentence;
  for (std::size_t t = 0; t < labeled.size(); ++t) {
    labeled.tokens[t].label = first[t] ? corpus::Label::kTrigger : corpus::Label::kNonTrigger;
  }
  pool_.push_back(std::move(labeled));
  rereview_.erase(item.index);
  open_.erase(item.index);
  result.status = SubmitStatus::kCommitted;
  if (++since_last_retrain_ >= options_.batch_trigger) {
    since_last_retrain_ = 0;
    schedule_retrain();
    result.status = SubmitStatus::kRetrainStarted;
  }
  result.committed = pool_.size();
  result.since_last_retrain = since_last_retrain_;
  return result;
}

void AnnotationSession::schedule_retrain() {
  ++retrains_started_;
  RetrainRequest request{pool_, options_.seed, retrains_started_};
  {
    std::lock_guard lock(work_mu_);
    work_.push_back(std::move(request));
  }
  work_cv_.notify_all();
}

void AnnotationSession::worker_loop() {
  for (;;) {
    RetrainRequest request;
    {
      std::unique_lock lock(work_mu_);
      work_cv_.wait(lock, [&] { return stopping_ || !work_.empty(); });
      if (work_.empty()) return;
      request = std::move(work_.front());
      work_.pop_front();
      busy_ = true;
    }
    std::shared_ptr<const SuggestionModel> model;
    std::string error;
    try {
      if (!retrainer_) throw Error("no retrainer configured");
      model = retrainer_(request);
      if (!model) throw Error("retrainer returned no model");
    } catch (const std::exception& e) {
      error = e.what();
    }
    if (model) {
      std::lock_guard lock(snapshot_mu_);
      snapshot_ = std::move(model);
    }
    {
      std::lock_guard lock(mu_);
      if (error.empty()) {
        ++retrains_completed_;
      } else {
        ++retrains_failed_;
        last_error_ = "retrain " + std::to_string(request.generation) + " failed: " + error;
      }
    }
    {
      std::lock_guard lock(work_mu_);
      busy_ = false;
    }
    work_cv_.notify_all();
  }
}

void AnnotationSession::wait_idle() {
  std::unique_lock lock(work_mu_);
  work_cv_.wait(lock, [&] { return work_.empty() && !busy_; });
}

SessionStatus AnnotationSession::status() const {
  SessionStatus s;
  {
    std::lock_guard lock(snapshot_mu_);
    s.has_model = snapshot_ != nullptr;
  }
  {
    std::lock_guard lock(work_mu_);
    s.retrain_running = busy_ || !work_.empty();
  }
  std::lock_guard lock(mu_);
  s.mode = options_.mode;
  s.reviewers_required = options_.reviewers_required;
  s.batch_trigger = options_.batch_trigger;
  s.total = dataset_.size();
  s.queued = queue_.size();
  s.in_review = open_.size();
  s.committed = pool_.size();
  s.since_last_retrain = since_last_retrain_;
  s.retrains_started = retrains_started_;
  s.retrains_completed = retrains_completed_;
  s.retrains_failed = retrains_failed_;
  s.last_error = last_error_;
  s.complete = queue_.empty() && open_.empty();
  return s;
}

std::string AnnotationSession::export_jsonl() const {
  std::lock_guard lock(mu_);
  corpus::Dataset out;
  out.sentences = pool_;
  return corpus::to_jsonl(out);
}

}  // namespace oed::annotator
