#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "gptpat/gateway.hpp"

namespace gptpat {

// Network client speaking the OpenAI-compatible chat-completion wire format:
// POST {base_url}{path} with {"model","messages":[{"role","content"}],
// "temperature"}, completion read from choices[0].message.content.
// Credentials come from the named environment variable.
class HttpChatBackend : public ChatBackend {
 public:
  struct Options {
    std::string base_url;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "OPENAI_API_KEY";
    int connect_timeout_s = 30;
    int read_timeout_s = 300;
  };

  explicit HttpChatBackend(Options options);

  std::string complete(const ChatRequest& request) override;
  std::string backend_id() const override { return "http:" + options_.base_url; }

 private:
  Options options_;
  std::string api_key_;
};

// Deterministic offline stand-in. Question-generation prompts echo the
// embedded text back as the "question", re-answer prompts return the question
// with the length suffix stripped, polish prompts return the sentence
// unchanged, anything else echoes the whole message. The echoed re-answer
// always matches the original text, so with this backend every input looks
// machine-like; use ScriptedChatBackend to stage contrasting responses.
class EchoChatBackend : public ChatBackend {
 public:
  std::string complete(const ChatRequest& request) override;
  std::string backend_id() const override { return "mock:echo"; }
  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::atomic<std::uint64_t> calls_{0};
};

// Test/offline backend driven by an exact prompt -> response table, with
// optional failure injection. Thread safe; records every prompt it sees.
class ScriptedChatBackend : public ChatBackend {
 public:
  void add_response(std::string prompt, std::string response);
  // Called for prompts not in the table. Without a fallback such prompts
  // raise a Malformed backend error.
  void set_fallback(std::function<std::string(const ChatRequest&)> fallback);

  // The next `count` calls throw before consulting the table.
  void fail_next(int count, BackendError::Kind kind = BackendError::Kind::Transport);
  // Every call whose prompt contains `needle` throws.
  void fail_when_contains(std::string needle, BackendError::Kind kind = BackendError::Kind::Transport);

  std::string complete(const ChatRequest& request) override;
  std::string backend_id() const override { return "mock:scripted"; }

  std::uint64_t calls() const { return calls_.load(); }
  std::vector<std::string> seen() const;

  // JSON-Lines of {"prompt","response"}; unknown prompts echo.
  static std::shared_ptr<ScriptedChatBackend> from_jsonl(const std::filesystem::path& path);

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> responses_;
  std::function<std::string(const ChatRequest&)> fallback_;
  std::deque<BackendError::Kind> scripted_failures_;
  std::vector<std::pair<std::string, BackendError::Kind>> content_failures_;
  std::vector<std::string> seen_;
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace gptpat
