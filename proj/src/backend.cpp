#include "dst/backend.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "dst/error.hpp"
#include "dst/text.hpp"

namespace dst {

namespace {

std::atomic<unsigned long> g_session_counter{0};

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class ReplaySession : public ChatSession {
 public:
  ReplaySession(std::string dialogue_id, std::shared_ptr<const TranscriptStore> store)
      : ChatSession(dialogue_id, BackendKind::replay, store->model_version()), store_(std::move(store)) {}

 protected:
  std::string complete(const std::vector<ChatEntry>& /*conversation*/, int turn) override {
    const auto* rec = store_->find(dialogue_id(), turn);
    if (!rec)
      throw BackendError("replay store has no response for " + dialogue_id() + " turn " + std::to_string(turn));
    return rec->response;
  }

 private:
  std::shared_ptr<const TranscriptStore> store_;
};

class FaultSession : public ChatSession {
 public:
  FaultSession(std::string dialogue_id, std::vector<FaultStep> steps, std::shared_ptr<const TranscriptStore> fallback)
      : ChatSession(dialogue_id, BackendKind::fault, fallback ? fallback->model_version() : "fault"),
        steps_(std::move(steps)),
        fallback_(std::move(fallback)) {}

 protected:
  std::string complete(const std::vector<ChatEntry>& /*conversation*/, int turn) override {
    auto idx = static_cast<std::size_t>(turn - 1);
    if (idx >= steps_.size())
      throw BackendError("fault script for " + dialogue_id() + " exhausted at turn " + std::to_string(turn));
    const auto& step = steps_[idx];
    switch (step.action) {
      case FaultStep::Action::respond:
        return step.text;
      case FaultStep::Action::fail:
        throw BackendError("scripted failure for " + dialogue_id() + " turn " + std::to_string(turn) + ": " +
                           step.text);
      case FaultStep::Action::replay:
        if (fallback_)
          if (const auto* rec = fallback_->find(dialogue_id(), turn)) return rec->response;
        throw BackendError("no recorded response for " + dialogue_id() + " turn " + std::to_string(turn));
    }
    throw BackendError("invalid fault step");
  }

 private:
  std::vector<FaultStep> steps_;
  std::shared_ptr<const TranscriptStore> fallback_;
};

}  // namespace

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::remote:
      return "remote";
    case BackendKind::replay:
      return "replay";
    case BackendKind::fault:
      return "fault";
  }
  return "replay";
}

BackendKind parse_backend_kind(std::string_view name) {
  for (auto k : {BackendKind::remote, BackendKind::replay, BackendKind::fault})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown backend kind: " + std::string(name));
}

std::string_view to_string(Role role) { return role == Role::user ? "user" : "assistant"; }

ChatSession::ChatSession(std::string dialogue_id, BackendKind kind, std::string model_id)
    : session_id_(std::string(to_string(kind)) + "-" + dialogue_id + "-" + std::to_string(++g_session_counter)),
      dialogue_id_(std::move(dialogue_id)),
      kind_(kind),
      model_id_(std::move(model_id)) {}

std::string ChatSession::send(const TurnMessage& message) {
  int expected = static_cast<int>(exchanges_.size()) + 1;
  if (message.turn_index != expected)
    throw BackendError("out-of-order send for " + dialogue_id_ + ": got turn " + std::to_string(message.turn_index) +
                       ", expected " + std::to_string(expected));
  std::vector<ChatEntry> conversation = history_;
  conversation.push_back({Role::user, message.text});
  std::string response = complete(conversation, message.turn_index);
  history_.push_back({Role::user, message.text});
  history_.push_back({Role::assistant, response});
  exchanges_.push_back({message.turn_index, message.text, response, utc_timestamp()});
  return response;
}

void ChatSession::persist_transcript(const std::filesystem::path& path) const {
  if (exchanges_.empty()) throw BackendError("session " + session_id_ + " has no exchanges to persist");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw BackendError("cannot write transcript: " + path.string());
  for (const auto& ex : exchanges_) {
    TranscriptRecord rec{dialogue_id_, ex.turn, ex.prompt, ex.response, model_id_, ex.timestamp};
    out << to_json(rec).dump() << '\n';
  }
  if (!out) throw BackendError("failed writing transcript: " + path.string());
}

Json to_json(const TranscriptRecord& record) {
  Json j;
  j["dialogue_id"] = record.dialogue_id;
  j["turn"] = record.turn;
  j["prompt"] = record.prompt;
  j["response"] = record.response;
  j["model_id"] = record.model_id;
  j["timestamp"] = record.timestamp ? Json(*record.timestamp) : Json(nullptr);
  return j;
}

TranscriptRecord transcript_record_from_json(const Json& j) {
  TranscriptRecord r;
  try {
    r.dialogue_id = j.at("dialogue_id").get<std::string>();
    r.turn = j.at("turn").get<int>();
    r.prompt = j.value("prompt", "");
    r.response = j.at("response").get<std::string>();
    r.model_id = j.value("model_id", "");
    if (j.contains("timestamp") && j["timestamp"].is_string()) r.timestamp = j["timestamp"].get<std::string>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad transcript record: ") + e.what());
  }
  return r;
}

TranscriptStore TranscriptStore::load(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw DataError("transcript store not found: " + path.string());
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  TranscriptStore store;
  for (const auto& file : files) {
    std::istringstream in(text::read_file(file));
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      Json j = Json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw DataError(file.string() + ":" + std::to_string(line_no) + ": malformed transcript line");
      store.add(transcript_record_from_json(j));
    }
  }
  return store;
}

void TranscriptStore::add(TranscriptRecord record) {
  auto key = std::make_pair(record.dialogue_id, record.turn);
  if (records_.count(key))
    throw DataError("duplicate transcript record for " + record.dialogue_id + " turn " + std::to_string(record.turn));
  records_.emplace(std::move(key), std::move(record));
}

const TranscriptRecord* TranscriptStore::find(const std::string& dialogue_id, int turn) const {
  auto it = records_.find({dialogue_id, turn});
  return it == records_.end() ? nullptr : &it->second;
}

bool TranscriptStore::has_dialogue(const std::string& dialogue_id) const { return turn_count(dialogue_id) > 0; }

int TranscriptStore::turn_count(const std::string& dialogue_id) const {
  int n = 0;
  for (auto it = records_.lower_bound({dialogue_id, 0}); it != records_.end() && it->first.first == dialogue_id; ++it)
    ++n;
  return n;
}

std::vector<std::string> TranscriptStore::dialogue_ids() const {
  std::vector<std::string> ids;
  for (const auto& [key, rec] : records_)
    if (ids.empty() || ids.back() != key.first) ids.push_back(key.first);
  return ids;
}

std::string TranscriptStore::model_version() const {
  return records_.empty() ? std::string() : records_.begin()->second.model_id;
}

ReplayBackend::ReplayBackend(std::shared_ptr<const TranscriptStore> store) : store_(std::move(store)) {
  if (!store_) throw ConfigError("replay backend needs a transcript store");
}

std::unique_ptr<ChatSession> ReplayBackend::open_session(const std::string& dialogue_id) {
  if (!store_->has_dialogue(dialogue_id)) throw BackendError("replay store has no dialogue " + dialogue_id);
  return std::make_unique<ReplaySession>(dialogue_id, store_);
}

FaultScript FaultScript::parse(std::string_view json_text, const std::string& source) {
  Json doc = parse_json_strict(json_text, source);
  if (!doc.is_object()) throw DataError(source + ": expected {dialogue: [steps]}");
  FaultScript script;
  for (const auto& [dialogue, steps] : doc.items()) {
    if (!steps.is_array()) throw DataError(source + ": steps of " + dialogue + " must be a list");
    auto& out = script.dialogues[dialogue];
    for (const auto& s : steps) {
      if (s.is_string() && s.get<std::string>() == "replay") {
        out.push_back({FaultStep::Action::replay, ""});
      } else if (s.is_object() && s.contains("respond")) {
        out.push_back({FaultStep::Action::respond, s["respond"].get<std::string>()});
      } else if (s.is_object() && s.contains("fail")) {
        out.push_back({FaultStep::Action::fail, s["fail"].get<std::string>()});
      } else {
        throw DataError(source + ": bad step in " + dialogue + ": " + s.dump());
      }
    }
  }
  return script;
}

FaultScript FaultScript::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("fault script not found: " + path.string());
  return parse(text::read_file(path), path.string());
}

FaultBackend::FaultBackend(FaultScript script, std::shared_ptr<const TranscriptStore> fallback)
    : script_(std::move(script)), fallback_(std::move(fallback)) {}

std::unique_ptr<ChatSession> FaultBackend::open_session(const std::string& dialogue_id) {
  auto it = script_.dialogues.find(dialogue_id);
  if (it != script_.dialogues.end()) return std::make_unique<FaultSession>(dialogue_id, it->second, fallback_);
  if (fallback_ && fallback_->has_dialogue(dialogue_id)) {
    std::vector<FaultStep> steps(static_cast<std::size_t>(fallback_->turn_count(dialogue_id)),
                                 FaultStep{FaultStep::Action::replay, ""});
    return std::make_unique<FaultSession>(dialogue_id, std::move(steps), fallback_);
  }
  throw BackendError("fault backend has no script for " + dialogue_id);
}

void BackendConfig::validate() const {
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (!(rate_limit > 0)) throw ConfigError("rate_limit must be > 0");
  if (!(timeout_seconds > 0)) throw ConfigError("timeout must be > 0");
  if (retry_base_delay < 0) throw ConfigError("retry_base_delay must be >= 0");
  if (endpoint_url.empty()) throw ConfigError("remote backend needs an endpoint URL");
  if (model_id.empty()) throw ConfigError("remote backend needs a model id");
}

RateLimiter::RateLimiter(double requests_per_minute, double burst)
    : rate_per_second_(requests_per_minute / 60.0), capacity_(burst), tokens_(burst), last_(Clock::now()) {
  if (!(requests_per_minute > 0)) throw ConfigError("rate_limit must be > 0");
}

void RateLimiter::acquire() {
  std::unique_lock lock(mutex_);
  for (;;) {
    auto now = Clock::now();
    std::chrono::duration<double> elapsed = now - last_;
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed.count() * rate_per_second_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_second_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

}  // namespace dst
