#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "dst/backend.hpp"
#include "dst/error.hpp"

namespace dst {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
  auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

bool is_transient_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

class RemoteSession : public ChatSession {
 public:
  RemoteSession(std::string dialogue_id, const BackendConfig& config, const std::string& api_key,
                std::shared_ptr<RateLimiter> limiter, Sleeper sleeper)
      : ChatSession(std::move(dialogue_id), BackendKind::remote, config.model_id),
        config_(config),
        api_key_(api_key),
        limiter_(std::move(limiter)),
        sleeper_(std::move(sleeper)) {}

 protected:
  std::string complete(const std::vector<ChatEntry>& conversation, int turn) override {
    auto endpoint = split_url(config_.endpoint_url);
    httplib::Client client(endpoint.origin);
    auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
    std::string body = build_chat_request(config_, conversation).dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) sleeper_(std::chrono::duration<double>(config_.retry_base_delay * (1 << (attempt - 1))));
      if (limiter_) limiter_->acquire();
      auto res = client.Post(endpoint.path, headers, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (is_transient_status(res->status)) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw BackendError("chat endpoint returned HTTP " + std::to_string(res->status) + " for " + dialogue_id() +
                           " turn " + std::to_string(turn) + ": " + res->body.substr(0, 200));
      Json reply = Json::parse(res->body, nullptr, false);
      if (reply.is_discarded()) throw BackendError("chat endpoint returned malformed JSON");
      try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const Json::exception&) {
        throw BackendError("chat endpoint reply lacks choices[0].message.content");
      }
    }
    throw BackendError("retries exhausted for " + dialogue_id() + " turn " + std::to_string(turn) + " after " +
                       std::to_string(config_.max_retries) + " retries (" + last_error + ")");
  }

 private:
  BackendConfig config_;
  std::string api_key_;
  std::shared_ptr<RateLimiter> limiter_;
  Sleeper sleeper_;
};

}  // namespace

Json build_chat_request(const BackendConfig& config, const std::vector<ChatEntry>& conversation) {
  Json messages = Json::array();
  for (const auto& entry : conversation) {
    Json m;
    m["role"] = std::string(to_string(entry.role));
    m["content"] = entry.text;
    messages.push_back(std::move(m));
  }
  Json body;
  body["model"] = config.model_id;
  body["temperature"] = config.temperature;
  body["messages"] = std::move(messages);
  return body;
}

RemoteBackend::RemoteBackend(BackendConfig config, std::shared_ptr<RateLimiter> limiter, Sleeper sleeper)
    : config_(std::move(config)), limiter_(std::move(limiter)), sleeper_(std::move(sleeper)) {
  config_.validate();
  split_url(config_.endpoint_url);
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) throw ConfigError("environment variable " + config_.api_key_env + " is not set");
  api_key_ = key;
  if (!limiter_) limiter_ = std::make_shared<RateLimiter>(config_.rate_limit);
  if (!sleeper_) sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
}

std::unique_ptr<ChatSession> RemoteBackend::open_session(const std::string& dialogue_id) {
  return std::make_unique<RemoteSession>(dialogue_id, config_, api_key_, limiter_, sleeper_);
}

}  // namespace dst
