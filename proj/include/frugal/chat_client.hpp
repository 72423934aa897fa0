#pragma once

// Provider-agnostic chat completion client. Request: a model id plus ordered
// (role, content) messages, posted as JSON in the widely used
// {"model", "messages": [{"role", "content"}]} shape. Response: the text of
// choices[0].message.content (or a top-level "content"/"text" field).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

// resolv.h (via httplib) defines _res, which Eigen uses as a parameter name.
#ifdef _res
#undef _res
#endif

#include "frugal/warmstart.hpp"

namespace frugal {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChatConfig {
  std::string endpoint;  // e.g. https://host/v1/chat/completions
  std::string model;
  std::string key_env = "LLM_API_KEY";
  std::chrono::seconds timeout{60};
  std::size_t max_concurrent = 4;
};

/// Appends every request and response verbatim, one JSON object per line.
class TranscriptLog {
 public:
  explicit TranscriptLog(std::filesystem::path path) : path_(std::move(path)) {}

  void append(const nlohmann::json& record) {
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << record.dump() << '\n';
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

struct Endpoint {
  std::string scheme_host_port;
  std::string path;
};

inline Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint '" + url + "' is not an absolute URL");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

inline nlohmann::json chat_request_body(const std::string& model,
                                        const std::vector<std::pair<std::string, std::string>>& messages) {
  nlohmann::json body;
  body["model"] = model;
  body["messages"] = nlohmann::json::array();
  for (const auto& [role, content] : messages) body["messages"].push_back({{"role", role}, {"content", content}});
  return body;
}

inline std::string chat_response_text(const nlohmann::json& j) {
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& c = j["choices"][0];
    if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
      return c["message"]["content"].get<std::string>();
    if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
  }
  for (const char* k : {"content", "text", "output"})
    if (j.contains(k) && j[k].is_string()) return j[k].get<std::string>();
  throw SynthesisError("chat response has no completion text");
}

class ChatClient {
 public:
  /// Reads the API key from the environment; throws ConfigError when unset.
  ChatClient(ChatConfig cfg, std::shared_ptr<TranscriptLog> log)
      : cfg_(std::move(cfg)), log_(std::move(log)), slots_(std::make_shared<Slots>(cfg_.max_concurrent)) {
    const char* key = std::getenv(cfg_.key_env.c_str());
    if (key == nullptr || *key == '\0')
      throw ConfigError("remote synthesizer needs the API key in environment variable " + cfg_.key_env);
    key_ = key;
    if (cfg_.endpoint.empty()) throw ConfigError("remote synthesizer needs --endpoint");
    endpoint_ = split_url(cfg_.endpoint);
  }

  std::string complete(const std::vector<std::pair<std::string, std::string>>& messages) {
    const auto body = chat_request_body(cfg_.model, messages);
    if (log_) log_->append({{"kind", "request"}, {"endpoint", cfg_.endpoint}, {"body", body}});

    slots_->acquire();
    httplib::Result res = [&] {
      httplib::Client cli(endpoint_.scheme_host_port);
      cli.set_connection_timeout(cfg_.timeout);
      cli.set_read_timeout(cfg_.timeout);
      cli.set_write_timeout(cfg_.timeout);
      cli.set_bearer_token_auth(key_);
      return cli.Post(endpoint_.path, body.dump(), "application/json");
    }();
    slots_->release();

    if (!res) {
      const std::string err = httplib::to_string(res.error());
      if (log_) log_->append({{"kind", "error"}, {"error", err}});
      throw SynthesisError("chat request failed: " + err);
    }
    if (log_) log_->append({{"kind", "response"}, {"status", res->status}, {"body", res->body}});
    if (res->status != 200) throw SynthesisError("chat endpoint returned HTTP " + std::to_string(res->status));
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw SynthesisError("chat response is not JSON");
    return chat_response_text(j);
  }

  std::string complete(const PromptBundle& prompt) { return complete(prompt.messages()); }

 private:
  // Shared across copies so parallel runs respect one global cap.
  struct Slots {
    explicit Slots(std::size_t n) : sem(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, n))) {}
    void acquire() { sem.acquire(); }
    void release() { sem.release(); }
    std::counting_semaphore<1024> sem;
  };

  ChatConfig cfg_;
  std::shared_ptr<TranscriptLog> log_;
  std::shared_ptr<Slots> slots_;
  std::string key_;
  Endpoint endpoint_;
};

/// Synthesizer backed by a remote chat endpoint.
inline std::unique_ptr<Synthesizer> make_remote_synthesizer(std::shared_ptr<ChatClient> client) {
  return std::make_unique<ChatSynthesizer>([client](const PromptBundle& p) { return client->complete(p); });
}

}  // namespace frugal
