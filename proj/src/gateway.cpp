#include "gptpat/gateway.hpp"

#include <fstream>
#include <thread>

#include <json.hpp>

#include "internal/hash.hpp"
#include "internal/time.hpp"

namespace gptpat {

using nlohmann::json;

namespace {

// Replaces the first occurrence of the placeholder only, so placeholder-like
// content inside `value` is never re-substituted.
std::string substitute_once(std::string tmpl, const std::string& placeholder,
                            const std::string& value) {
  auto pos = tmpl.find(placeholder);
  if (pos == std::string::npos) return tmpl;
  tmpl.replace(pos, placeholder.size(), value);
  return tmpl;
}

}  // namespace

const PromptTemplate& prompt_template(PromptKind kind) {
  // Byte-exact templates; tests pin the rendered strings.
  static const PromptTemplate qg{
      PromptKind::QG,
      "I want you to play the role of the questioner.  I will type an answer in English, and you "
      "will ask me a question based on the answer in the same language. Don't write any "
      "explanations or other text, just give me the question. <TEXT>"};
  static const PromptTemplate response{PromptKind::Response,
                                       "<QUESTION> Answer in <LEN> words or less."};
  static const PromptTemplate ccnews{
      PromptKind::CCNewsGen, "Heading <TITLE> and beginning with <DESC>, follow up a press release"};
  static const PromptTemplate aclabs{
      PromptKind::ACLAbsGen,
      "Please write an abstract with the title <TITLE> for the research paper,"};
  switch (kind) {
    case PromptKind::QG: return qg;
    case PromptKind::Response: return response;
    case PromptKind::CCNewsGen: return ccnews;
    case PromptKind::ACLAbsGen: return aclabs;
  }
  return qg;
}

ChatRequest single_turn_request(std::string model_id, std::string prompt, double temperature,
                                std::string request_tag) {
  ChatRequest request;
  request.model_id = std::move(model_id);
  request.messages.push_back({"user", std::move(prompt)});
  request.temperature = temperature;
  request.request_tag = std::move(request_tag);
  return request;
}

std::string render_qg_prompt(const std::string& text_body) {
  if (text_body.empty()) throw DataError("cannot render a question-generation prompt for empty text");
  return substitute_once(prompt_template(PromptKind::QG).template_text, "<TEXT>", text_body);
}

std::string render_reanswer_prompt(const std::string& question, std::size_t len) {
  if (question.empty()) throw DataError("cannot render a re-answer prompt for an empty question");
  if (len == 0) throw DataError("re-answer length must be at least 1");
  std::string rendered =
      substitute_once(prompt_template(PromptKind::Response).template_text, "<QUESTION>", question);
  return substitute_once(rendered, "<LEN>", std::to_string(len));
}

std::string cache_key(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& message : request.messages) {
    messages.push_back(json{{"role", message.role}, {"content", message.content}});
  }
  // nlohmann::json orders object keys, so the dump is canonical.
  json canonical{{"model", request.model_id},
                 {"messages", std::move(messages)},
                 {"temperature", request.temperature}};
  return internal::sha256_hex(canonical.dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  std::ifstream in(dir_ / (key + ".json"));
  if (!in) return std::nullopt;
  try {
    json entry = json::parse(in);
    return entry.at("response_text").get<std::string>();
  } catch (const json::exception&) {
    // Unreadable entries behave like misses and get overwritten.
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const ChatRequest& request,
                        const std::string& response_text) {
  json messages = json::array();
  for (const auto& message : request.messages) {
    messages.push_back(json{{"role", message.role}, {"content", message.content}});
  }
  json entry{{"key", key},
             {"request",
              {{"model", request.model_id},
               {"messages", std::move(messages)},
               {"temperature", request.temperature},
               {"request_tag", request.request_tag}}},
             {"response_text", response_text},
             {"stored_at", internal::iso8601_utc_now()}};

  std::unique_lock lock(mutex_);
  auto path = dir_ / (key + ".json");
  auto tmp = dir_ / (key + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write cache entry " + path.string());
    out << entry.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, std::shared_ptr<ResponseCache> cache,
                 GatewayOptions options)
    : backend_(std::move(backend)), cache_(std::move(cache)), options_(options) {
  if (!backend_) throw ConfigError("gateway needs a chat backend");
  if (options_.max_attempts < 1) throw ConfigError("gateway max_attempts must be at least 1");
}

std::string Gateway::complete(const ChatRequest& request) {
  const std::string key = cache_key(request);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      cache_hits_.fetch_add(1);
      audit(request, *hit, true);
      return *hit;
    }
  }

  auto delay = options_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      backend_calls_.fetch_add(1);
      std::string text = backend_->complete(request);
      if (text.empty())
        throw BackendError(BackendError::Kind::EmptyCompletion,
                           "backend returned an empty completion");
      if (cache_) cache_->put(key, request, text);
      audit(request, text, false);
      return text;
    } catch (const BackendError& error) {
      if (!error.transient() || attempt >= options_.max_attempts) throw;
      std::this_thread::sleep_for(delay);
      delay = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(delay.count()) * options_.backoff_multiplier));
    }
  }
}

void Gateway::audit(const ChatRequest& request, const std::string& response, bool from_cache) {
  if (options_.audit_log.empty()) return;
  json messages = json::array();
  for (const auto& message : request.messages) {
    messages.push_back(json{{"role", message.role}, {"content", message.content}});
  }
  json line{{"ts", internal::iso8601_utc_now()},
            {"model", request.model_id},
            {"temperature", request.temperature},
            {"request_tag", request.request_tag},
            {"messages", std::move(messages)},
            {"response", response},
            {"source", from_cache ? "cache" : "backend"}};
  std::lock_guard lock(audit_mutex_);
  std::ofstream out(options_.audit_log, std::ios::app);
  if (out) out << line.dump() << '\n';
}

}  // namespace gptpat
