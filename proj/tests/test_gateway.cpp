#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Eigen (via the project headers) has to precede httplib: the socket headers
// leak macros that mangle Eigen's internals.
#include "gptpat/backends.hpp"
#include "gptpat/gateway.hpp"
#include "support/fixtures.hpp"

#include <httplib.h>

#include <atomic>
#include <regex>
#include <set>
#include <thread>

using namespace gptpat;

namespace {

GatewayOptions fast_retry() {
  GatewayOptions options;
  options.initial_backoff = std::chrono::milliseconds(1);
  return options;
}

}  // namespace

TEST_CASE("qg prompt renders byte-exactly") {
  CHECK(render_qg_prompt("X") ==
        "I want you to play the role of the questioner.  I will type an answer in English, and "
        "you will ask me a question based on the answer in the same language. Don't write any "
        "explanations or other text, just give me the question. X");
  CHECK_THROWS_AS(render_qg_prompt(""), DataError);
}

TEST_CASE("qg prompt rendering is deterministic") {
  CHECK(render_qg_prompt("same input") == render_qg_prompt("same input"));
}

TEST_CASE("a body containing the placeholder is substituted once, outermost only") {
  std::string body = "before <TEXT> after";
  std::string rendered = render_qg_prompt(body);
  // hand-built expectation: template prefix + the body verbatim
  const std::string& tmpl = prompt_template(PromptKind::QG).template_text;
  std::string expected = tmpl.substr(0, tmpl.find("<TEXT>")) + body;
  CHECK(rendered == expected);
  // exactly one copy of the body's own placeholder survives
  CHECK(rendered.find("<TEXT>") == rendered.rfind("<TEXT>"));
}

TEST_CASE("re-answer prompt renders byte-exactly") {
  CHECK(render_reanswer_prompt("What is X?", 2) == "What is X? Answer in 2 words or less.");
  // the template has no plural handling; emitted as-is
  CHECK(render_reanswer_prompt("Q", 1) == "Q Answer in 1 words or less.");
  CHECK_THROWS_AS(render_reanswer_prompt("Q", 0), DataError);
  CHECK_THROWS_AS(render_reanswer_prompt("", 3), DataError);
}

TEST_CASE("the rendered length round-trips through regex extraction") {
  std::regex pattern(R"( Answer in (\d+) words or less\.$)");
  for (std::size_t len : {1ul, 2ul, 7ul, 42ul, 1000ul}) {
    std::string rendered = render_reanswer_prompt("Why?", len);
    std::smatch match;
    REQUIRE(std::regex_search(rendered, match, pattern));
    CHECK(std::stoul(match[1]) == len);
  }
}

TEST_CASE("cache keys are deterministic and sensitive") {
  auto request = single_turn_request("gpt-3.5-turbo", "hello", 0.2, "tag-a");
  auto same = single_turn_request("gpt-3.5-turbo", "hello", 0.2, "tag-b");
  CHECK(cache_key(request) == cache_key(same));  // request_tag is ignored

  auto other_temp = single_turn_request("gpt-3.5-turbo", "hello", 0.3);
  CHECK(cache_key(request) != cache_key(other_temp));

  auto other_model = single_turn_request("gpt-4", "hello", 0.2);
  CHECK(cache_key(request) != cache_key(other_model));

  auto other_text = single_turn_request("gpt-3.5-turbo", "hello!", 0.2);
  CHECK(cache_key(request) != cache_key(other_text));
}

TEST_CASE("permuting messages changes the key") {
  ChatRequest forward;
  forward.model_id = "m";
  forward.messages = {{"user", "first"}, {"user", "second"}};
  ChatRequest reversed = forward;
  std::swap(reversed.messages[0], reversed.messages[1]);
  CHECK(cache_key(forward) != cache_key(reversed));
  // both permutations hash stably
  CHECK(cache_key(forward) == cache_key(forward));
  CHECK(cache_key(reversed) == cache_key(reversed));
}

TEST_CASE("complete passes the mock response through") {
  auto backend = std::make_shared<ScriptedChatBackend>();
  backend->add_response("ping", "Q1");
  Gateway gateway(backend, nullptr, fast_retry());
  CHECK(gateway.complete(single_turn_request("m", "ping")) == "Q1");
  CHECK(gateway.backend_calls() == 1);
}

TEST_CASE("warm cache serves without backend calls") {
  fixtures::TempDir dir("gateway_cache");
  auto backend = std::make_shared<ScriptedChatBackend>();
  backend->add_response("question me", "the answer");
  auto cache = std::make_shared<ResponseCache>(dir.path() / "cache");
  Gateway gateway(backend, cache, fast_retry());

  auto request = single_turn_request("m", "question me");
  CHECK(gateway.complete(request) == "the answer");
  CHECK(gateway.backend_calls() == 1);
  CHECK(gateway.complete(request) == "the answer");
  CHECK(gateway.backend_calls() == 1);  // zero extra backend calls
  CHECK(gateway.cache_hits() == 1);

  // a second gateway over the same directory stays warm
  Gateway rewarmed(backend, std::make_shared<ResponseCache>(dir.path() / "cache"), fast_retry());
  CHECK(rewarmed.complete(request) == "the answer");
  CHECK(rewarmed.backend_calls() == 0);
}

TEST_CASE("transient failures retry with bounded attempts") {
  auto backend = std::make_shared<ScriptedChatBackend>();
  backend->add_response("flaky", "ok");
  backend->fail_next(2, BackendError::Kind::Transport);
  Gateway gateway(backend, nullptr, fast_retry());
  CHECK(gateway.complete(single_turn_request("m", "flaky")) == "ok");
  CHECK(backend->calls() == 3);  // two failures, one success

  // four failures exhaust the 3-attempt budget
  backend->fail_next(4, BackendError::Kind::RateLimited);
  CHECK_THROWS_AS(gateway.complete(single_turn_request("m", "flaky2")), BackendError);
  CHECK(backend->calls() == 6);
}

TEST_CASE("non-transient failures do not retry") {
  auto backend = std::make_shared<ScriptedChatBackend>();
  backend->fail_next(1, BackendError::Kind::Auth);
  Gateway gateway(backend, nullptr, fast_retry());
  CHECK_THROWS_AS(gateway.complete(single_turn_request("m", "x")), BackendError);
  CHECK(backend->calls() == 1);
}

TEST_CASE("empty completions are rejected and never cached") {
  fixtures::TempDir dir("gateway_empty");
  auto backend = std::make_shared<ScriptedChatBackend>();
  backend->add_response("void", "");
  auto cache = std::make_shared<ResponseCache>(dir.path() / "cache");
  Gateway gateway(backend, cache, fast_retry());
  auto request = single_turn_request("m", "void");
  CHECK_THROWS_AS(gateway.complete(request), BackendError);
  CHECK(cache->get(cache_key(request)) == std::nullopt);
}

TEST_CASE("backend calls stay within the distinct keys requested") {
  fixtures::TempDir dir("gateway_subset");
  auto backend = std::make_shared<ScriptedChatBackend>();
  backend->set_fallback([](const ChatRequest& r) { return "r:" + r.messages.back().content; });
  auto cache = std::make_shared<ResponseCache>(dir.path() / "cache");
  Gateway gateway(backend, cache, fast_retry());

  std::set<std::string> distinct_keys;
  std::mt19937 rng(77);
  for (int i = 0; i < 200; ++i) {
    auto request = single_turn_request("m", "prompt " + std::to_string(rng() % 20));
    distinct_keys.insert(cache_key(request));
    gateway.complete(request);
  }
  CHECK(gateway.backend_calls() <= distinct_keys.size());
  CHECK(gateway.backend_calls() == 20);
}

TEST_CASE("gateway accepts concurrent completions") {
  fixtures::TempDir dir("gateway_conc");
  auto backend = std::make_shared<ScriptedChatBackend>();
  backend->set_fallback([](const ChatRequest& r) { return "r:" + r.messages.back().content; });
  auto cache = std::make_shared<ResponseCache>(dir.path() / "cache");
  Gateway gateway(backend, cache, fast_retry());

  std::atomic<int> mismatches{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        std::string prompt = "p" + std::to_string((t * 50 + i) % 13);
        if (gateway.complete(single_turn_request("m", prompt)) != "r:" + prompt) ++mismatches;
      }
    });
  }
  for (auto& thread : threads) thread.join();
  CHECK(mismatches == 0);
}

TEST_CASE("the audit log captures requests and responses") {
  fixtures::TempDir dir("gateway_audit");
  auto backend = std::make_shared<ScriptedChatBackend>();
  backend->add_response("logged prompt", "logged response");
  auto cache = std::make_shared<ResponseCache>(dir.path() / "cache");
  GatewayOptions options = fast_retry();
  options.audit_log = dir.path() / "audit.jsonl";
  Gateway gateway(backend, cache, options);

  gateway.complete(single_turn_request("m", "logged prompt", 0.2, "tag-1"));
  gateway.complete(single_turn_request("m", "logged prompt", 0.2, "tag-1"));  // cache hit

  std::ifstream in(options.audit_log);
  std::string line;
  REQUIRE(std::getline(in, line));
  auto first = nlohmann::json::parse(line);
  CHECK(first.at("source") == "backend");
  CHECK(first.at("response") == "logged response");
  CHECK(first.at("messages")[0].at("content") == "logged prompt");
  REQUIRE(std::getline(in, line));
  CHECK(nlohmann::json::parse(line).at("source") == "cache");
}

TEST_CASE("default temperature is 0.2") {
  CHECK(kDefaultTemperature == 0.2);
  auto request = single_turn_request("m", "x");
  CHECK(request.temperature == 0.2);
  CHECK(request.messages.size() == 1);  // fresh single-turn conversation
  CHECK(request.messages[0].role == "user");
}

TEST_CASE("http backend speaks the OpenAI-compatible wire shape") {
  httplib::Server server;
  std::atomic<int> hits{0};
  nlohmann::json seen_body;
  std::mutex seen_mutex;

  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    {
      std::lock_guard lock(seen_mutex);
      seen_body = nlohmann::json::parse(req.body);
    }
    nlohmann::json reply{
        {"choices",
         nlohmann::json::array(
             {nlohmann::json{{"message", {{"role", "assistant"}, {"content", "served"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });

  int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpChatBackend::Options options;
  options.base_url = "http://127.0.0.1:" + std::to_string(port);
  options.api_key_env = "GPTPAT_TEST_NO_SUCH_KEY";
  HttpChatBackend backend(options);

  auto request = single_turn_request("test-model", "the prompt", 0.2);
  CHECK(backend.complete(request) == "served");
  CHECK(hits == 1);
  {
    std::lock_guard lock(seen_mutex);
    CHECK(seen_body.at("model") == "test-model");
    CHECK(seen_body.at("temperature") == 0.2);
    REQUIRE(seen_body.at("messages").size() == 1);
    CHECK(seen_body.at("messages")[0].at("role") == "user");
    CHECK(seen_body.at("messages")[0].at("content") == "the prompt");
  }

  server.stop();
  server_thread.join();
}

TEST_CASE("http backend maps status codes onto error kinds") {
  httplib::Server server;
  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.status = 429;
    res.set_content("slow down", "text/plain");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpChatBackend::Options options;
  options.base_url = "http://127.0.0.1:" + std::to_string(port);
  HttpChatBackend backend(options);
  try {
    backend.complete(single_turn_request("m", "x"));
    FAIL("expected BackendError");
  } catch (const BackendError& ex) {
    CHECK(ex.kind() == BackendError::Kind::RateLimited);
    CHECK(ex.transient());
  }
  server.stop();
  server_thread.join();
}

TEST_CASE("echo backend inverts the pipeline prompts") {
  EchoChatBackend backend;
  auto qg = single_turn_request("m", render_qg_prompt("some body text"));
  CHECK(backend.complete(qg) == "some body text");
  auto reans = single_turn_request("m", render_reanswer_prompt("some body text", 3));
  CHECK(backend.complete(reans) == "some body text");
  CHECK(backend.calls() == 2);
}
