#include "gptpat/backends.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>

#include <httplib.h>
#include <json.hpp>

#include "internal/strings.hpp"
#include "internal/url.hpp"

namespace gptpat {

using nlohmann::json;

HttpChatBackend::HttpChatBackend(Options options) : options_(std::move(options)) {
  if (options_.base_url.empty()) throw ConfigError("chat backend base_url is empty");
  if (!options_.api_key_env.empty()) {
    if (const char* key = std::getenv(options_.api_key_env.c_str())) api_key_ = key;
  }
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& message : request.messages) {
    messages.push_back(json{{"role", message.role}, {"content", message.content}});
  }
  json body{{"model", request.model_id},
            {"messages", std::move(messages)},
            {"temperature", request.temperature}};

  // httplib clients are not thread safe; one per call keeps concurrent
  // requests independent.
  auto [base, prefix] = internal::split_base_url(options_.base_url);
  httplib::Client client(base);
  client.set_connection_timeout(options_.connect_timeout_s);
  client.set_read_timeout(options_.read_timeout_s);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto result = client.Post(prefix + options_.path, headers, body.dump(), "application/json");
  if (!result)
    throw BackendError(BackendError::Kind::Transport,
                       "chat backend unreachable: " + options_.base_url + " (" +
                           httplib::to_string(result.error()) + ")");
  if (result->status == 401 || result->status == 403)
    throw BackendError(BackendError::Kind::Auth,
                       "chat backend rejected credentials (HTTP " +
                           std::to_string(result->status) + "); check $" + options_.api_key_env);
  if (result->status == 429)
    throw BackendError(BackendError::Kind::RateLimited, "chat backend rate/quota limit (HTTP 429)");
  if (result->status >= 500)
    throw BackendError(BackendError::Kind::ServerError,
                       "chat backend error HTTP " + std::to_string(result->status));
  if (result->status != 200)
    throw BackendError(BackendError::Kind::Malformed,
                       "chat backend returned HTTP " + std::to_string(result->status) + ": " +
                           result->body.substr(0, 200));

  try {
    json payload = json::parse(result->body);
    return payload.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& ex) {
    throw BackendError(BackendError::Kind::Malformed,
                       std::string("malformed chat completion response: ") + ex.what());
  }
}

namespace {

const std::string& qg_prefix() {
  static const std::string prefix = [] {
    const std::string& tmpl = prompt_template(PromptKind::QG).template_text;
    return tmpl.substr(0, tmpl.find("<TEXT>"));
  }();
  return prefix;
}

constexpr const char* kPolishPrefix = "Please polish the following sentence, keeping its meaning: ";

// " Answer in <n> words or less." at the end of the prompt; returns the
// question part, or nothing when the suffix does not match.
std::optional<std::string> strip_reanswer_suffix(const std::string& content) {
  constexpr const char* kTail = " words or less.";
  constexpr const char* kMarker = " Answer in ";
  if (content.size() < std::strlen(kTail) + std::strlen(kMarker) + 1) return std::nullopt;
  if (content.compare(content.size() - std::strlen(kTail), std::strlen(kTail), kTail) != 0)
    return std::nullopt;
  auto marker_pos = content.rfind(kMarker, content.size() - std::strlen(kTail));
  if (marker_pos == std::string::npos) return std::nullopt;
  std::size_t digits_begin = marker_pos + std::strlen(kMarker);
  std::size_t digits_end = content.size() - std::strlen(kTail);
  if (digits_begin >= digits_end) return std::nullopt;
  for (std::size_t i = digits_begin; i < digits_end; ++i) {
    if (content[i] < '0' || content[i] > '9') return std::nullopt;
  }
  return content.substr(0, marker_pos);
}

}  // namespace

std::string EchoChatBackend::complete(const ChatRequest& request) {
  calls_.fetch_add(1);
  if (request.messages.empty())
    throw BackendError(BackendError::Kind::Malformed, "echo backend got an empty conversation");
  const std::string& content = request.messages.back().content;

  if (auto question = strip_reanswer_suffix(content)) return *question;
  if (content.rfind(qg_prefix(), 0) == 0) return content.substr(qg_prefix().size());
  if (content.rfind(kPolishPrefix, 0) == 0) return content.substr(std::strlen(kPolishPrefix));
  return content;
}

void ScriptedChatBackend::add_response(std::string prompt, std::string response) {
  std::lock_guard lock(mutex_);
  responses_[std::move(prompt)] = std::move(response);
}

void ScriptedChatBackend::set_fallback(std::function<std::string(const ChatRequest&)> fallback) {
  std::lock_guard lock(mutex_);
  fallback_ = std::move(fallback);
}

void ScriptedChatBackend::fail_next(int count, BackendError::Kind kind) {
  std::lock_guard lock(mutex_);
  for (int i = 0; i < count; ++i) scripted_failures_.push_back(kind);
}

void ScriptedChatBackend::fail_when_contains(std::string needle, BackendError::Kind kind) {
  std::lock_guard lock(mutex_);
  content_failures_.emplace_back(std::move(needle), kind);
}

std::string ScriptedChatBackend::complete(const ChatRequest& request) {
  calls_.fetch_add(1);
  if (request.messages.empty())
    throw BackendError(BackendError::Kind::Malformed, "scripted backend got an empty conversation");
  const std::string& content = request.messages.back().content;

  std::function<std::string(const ChatRequest&)> fallback;
  {
    std::lock_guard lock(mutex_);
    seen_.push_back(content);
    if (!scripted_failures_.empty()) {
      auto kind = scripted_failures_.front();
      scripted_failures_.pop_front();
      throw BackendError(kind, "scripted failure");
    }
    for (const auto& [needle, kind] : content_failures_) {
      if (content.find(needle) != std::string::npos)
        throw BackendError(kind, "scripted failure on \"" + needle + "\"");
    }
    auto it = responses_.find(content);
    if (it != responses_.end()) return it->second;
    fallback = fallback_;
  }
  if (fallback) return fallback(request);
  throw BackendError(BackendError::Kind::Malformed,
                     "scripted backend has no response for: " + content.substr(0, 120));
}

std::vector<std::string> ScriptedChatBackend::seen() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

std::shared_ptr<ScriptedChatBackend> ScriptedChatBackend::from_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock script " + path.string());
  auto backend = std::make_shared<ScriptedChatBackend>();
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (internal::trim(line).empty()) continue;
    try {
      json entry = json::parse(line);
      backend->add_response(entry.at("prompt").get<std::string>(),
                            entry.at("response").get<std::string>());
    } catch (const json::exception& ex) {
      throw ConfigError(path.string() + ": line " + std::to_string(line_number) + ": " + ex.what());
    }
  }
  backend->set_fallback([](const ChatRequest& request) {
    return request.messages.back().content;
  });
  return backend;
}

}  // namespace gptpat
