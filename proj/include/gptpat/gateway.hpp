#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "gptpat/errors.hpp"

namespace gptpat {

// Low temperature keeps completions focused; recorded in every PairRecord.
inline constexpr double kDefaultTemperature = 0.2;

struct Message {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model_id;
  std::vector<Message> messages;
  double temperature = kDefaultTemperature;
  std::string request_tag;  // bookkeeping only, excluded from the cache key
};

// A single-turn conversation holding only the rendered prompt as a user
// message. Every pipeline call starts a fresh conversation.
ChatRequest single_turn_request(std::string model_id, std::string prompt,
                                double temperature = kDefaultTemperature,
                                std::string request_tag = {});

enum class PromptKind { QG, Response, CCNewsGen, ACLAbsGen };

// A prompt with its substitution placeholders (<TEXT>, <QUESTION>, <LEN>,
// <TITLE>, <DESC>) still in place.
struct PromptTemplate {
  PromptKind kind;
  std::string template_text;
};

const PromptTemplate& prompt_template(PromptKind kind);

// Question-generation prompt with <TEXT> replaced by the body (outermost
// occurrence only, substituted once).
std::string render_qg_prompt(const std::string& text_body);

// "<question> Answer in <len> words or less." The template has no plural
// handling; len 1 renders "1 words".
std::string render_reanswer_prompt(const std::string& question, std::size_t len);

// Deterministic content hash of (model_id, messages, temperature). Everything
// else about the request is ignored.
std::string cache_key(const ChatRequest& request);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Returns the completion text; throws BackendError on failure.
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string backend_id() const = 0;
};

// Content-addressed on-disk response store. Writes are serialized and
// atomic (write-then-rename); readers may run concurrently.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const ChatRequest& request, const std::string& response_text);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

struct GatewayOptions {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double backoff_multiplier = 2.0;
  std::filesystem::path audit_log;  // empty disables request/response logging
};

// Front door for all chat calls: cache lookup, bounded-backoff retries of
// transient failures, audit logging. Safe for concurrent complete() calls.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<ChatBackend> backend,
                   std::shared_ptr<ResponseCache> cache = nullptr, GatewayOptions options = {});

  // Cached response when the key hits; otherwise exactly one successful
  // backend call (after at most max_attempts tries), stored and returned.
  // An empty completion is a malformed backend response, never cached.
  std::string complete(const ChatRequest& request);

  std::uint64_t backend_calls() const { return backend_calls_.load(); }
  std::uint64_t cache_hits() const { return cache_hits_.load(); }

  ChatBackend& backend() { return *backend_; }

 private:
  void audit(const ChatRequest& request, const std::string& response, bool from_cache);

  std::shared_ptr<ChatBackend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  GatewayOptions options_;
  std::atomic<std::uint64_t> backend_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
  std::mutex audit_mutex_;
};

}  // namespace gptpat
