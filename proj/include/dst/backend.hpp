#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dst/json_util.hpp"
#include "dst/prompting.hpp"

namespace dst {

enum class BackendKind { remote, replay, fault };
enum class Role { user, assistant };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view name);
std::string_view to_string(Role role);

struct ChatEntry {
  Role role;
  std::string text;
};

struct Exchange {
  int turn = 0;
  std::string prompt;
  std::string response;
  std::string timestamp;
};

/// One chat per dialogue. Single owner, strictly sequential.
class ChatSession {
 public:
  virtual ~ChatSession() = default;
  ChatSession(const ChatSession&) = delete;
  ChatSession& operator=(const ChatSession&) = delete;

  const std::string& session_id() const { return session_id_; }
  const std::string& dialogue_id() const { return dialogue_id_; }
  const std::string& model_id() const { return model_id_; }
  BackendKind backend_kind() const { return kind_; }
  const std::vector<ChatEntry>& history() const { return history_; }
  const std::vector<Exchange>& exchanges() const { return exchanges_; }

  /// Sends the next turn message. Its turn_index must equal the number of
  /// prior sends plus one. History grows by one user and one assistant entry
  /// on success and is untouched on failure.
  std::string send(const TurnMessage& message);

  /// Appends one JSONL record per exchange to `path`.
  void persist_transcript(const std::filesystem::path& path) const;

 protected:
  ChatSession(std::string dialogue_id, BackendKind kind, std::string model_id);

  /// `conversation` already ends with the new user message.
  virtual std::string complete(const std::vector<ChatEntry>& conversation, int turn) = 0;

 private:
  std::string session_id_;
  std::string dialogue_id_;
  BackendKind kind_;
  std::string model_id_;
  std::vector<ChatEntry> history_;
  std::vector<Exchange> exchanges_;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual BackendKind kind() const = 0;
  virtual std::unique_ptr<ChatSession> open_session(const std::string& dialogue_id) = 0;
};

struct TranscriptRecord {
  std::string dialogue_id;
  int turn = 0;
  std::string prompt;
  std::string response;
  std::string model_id;
  std::optional<std::string> timestamp;

  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

Json to_json(const TranscriptRecord& record);
TranscriptRecord transcript_record_from_json(const Json& j);

/// Recorded responses keyed by (dialogue, turn). Read-only after load.
class TranscriptStore {
 public:
  TranscriptStore() = default;

  /// Loads a JSONL file, or every *.jsonl file of a directory in name order.
  static TranscriptStore load(const std::filesystem::path& path);

  /// Throws DataError on a duplicate key.
  void add(TranscriptRecord record);

  const TranscriptRecord* find(const std::string& dialogue_id, int turn) const;
  bool has_dialogue(const std::string& dialogue_id) const;
  int turn_count(const std::string& dialogue_id) const;
  std::vector<std::string> dialogue_ids() const;
  std::size_t size() const { return records_.size(); }
  /// Model id of the recordings ("Jan 9" for the bundled fixtures).
  std::string model_version() const;

  friend bool operator==(const TranscriptStore&, const TranscriptStore&) = default;

 private:
  std::map<std::pair<std::string, int>, TranscriptRecord> records_;
};

/// Serves recorded responses verbatim. A missing key is an error.
class ReplayBackend : public ChatBackend {
 public:
  explicit ReplayBackend(std::shared_ptr<const TranscriptStore> store);
  BackendKind kind() const override { return BackendKind::replay; }
  std::unique_ptr<ChatSession> open_session(const std::string& dialogue_id) override;

 private:
  std::shared_ptr<const TranscriptStore> store_;
};

struct FaultStep {
  enum class Action { respond, fail, replay };
  Action action = Action::respond;
  std::string text;  // response for respond, message for fail
};

/// Per-dialogue scripted responses and failures. A session errors once its
/// script is exhausted.
struct FaultScript {
  std::map<std::string, std::vector<FaultStep>> dialogues;

  /// {"dialogue": [{"respond": "..."} | {"fail": "..."} | "replay", ...]}
  static FaultScript parse(std::string_view json_text, const std::string& source = "<fault script>");
  static FaultScript load(const std::filesystem::path& path);
};

/// Dialogues absent from the script are served from `fallback` when given.
class FaultBackend : public ChatBackend {
 public:
  explicit FaultBackend(FaultScript script, std::shared_ptr<const TranscriptStore> fallback = nullptr);
  BackendKind kind() const override { return BackendKind::fault; }
  std::unique_ptr<ChatSession> open_session(const std::string& dialogue_id) override;

 private:
  FaultScript script_;
  std::shared_ptr<const TranscriptStore> fallback_;
};

struct BackendConfig {
  std::string endpoint_url;
  std::string model_id;
  double temperature = 0.0;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  double retry_base_delay = 1.0;  // seconds
  double rate_limit = 60.0;       // requests per minute
  std::string api_key_env = "DST_API_KEY";

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

/// Token bucket shared by every session of a run.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double requests_per_minute, double burst = 1.0);

  /// Blocks until a request may be issued.
  void acquire();

 private:
  std::mutex mutex_;
  double rate_per_second_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

using Sleeper = std::function<void(std::chrono::duration<double>)>;

/// Chat-completion request body for the conversation so far.
Json build_chat_request(const BackendConfig& config, const std::vector<ChatEntry>& conversation);

/// Talks to an OpenAI-style chat-completion endpoint over HTTP(S). The key is
/// read from the configured environment variable when the backend is built.
class RemoteBackend : public ChatBackend {
 public:
  RemoteBackend(BackendConfig config, std::shared_ptr<RateLimiter> limiter = nullptr, Sleeper sleeper = {});
  BackendKind kind() const override { return BackendKind::remote; }
  std::unique_ptr<ChatSession> open_session(const std::string& dialogue_id) override;

 private:
  BackendConfig config_;
  std::string api_key_;
  std::shared_ptr<RateLimiter> limiter_;
  Sleeper sleeper_;
};

}  // namespace dst
