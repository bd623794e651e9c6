#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gptpat/similarity.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <httplib.h>

#include <random>
#include <thread>

using namespace gptpat;

namespace {

Embedding embed_of(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return Embedding(v);
}

std::string random_text(std::mt19937& rng, int max_words = 8, int alphabet = 6) {
  int words = 1 + static_cast<int>(rng() % max_words);
  std::string text;
  for (int w = 0; w < words; ++w) {
    if (w) text += ' ';
    text += static_cast<char>('a' + rng() % alphabet);  // tiny vocabulary, lots of overlap
  }
  return text;
}

}  // namespace

TEST_CASE("jaccard on the worked examples") {
  CHECK(jaccard("a b c", "a b c") == 1.0);
  CHECK(jaccard("a b", "c d") == 0.0);
  // |{b,c}| / |{a,b,c,d}| enumerated by hand
  CHECK(jaccard("a b c", "b c d") == 0.5);
  CHECK(jaccard("", "") == 1.0);
  CHECK(jaccard("", "a") == 0.0);
  CHECK(jaccard("A b", "a B") == 1.0);      // lowercased
  CHECK(jaccard("a a a b", "a b") == 1.0);  // sets, not multisets
}

TEST_CASE("jaccard matches the brute-force oracle on random inputs") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string a = random_text(rng);
    std::string b = random_text(rng);
    CHECK(jaccard(a, b) == doctest::Approx(oracle::jaccard(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("cosine on the worked examples") {
  auto e = embed_of({1, 2, 3});
  CHECK(cosine(e, e) == 1.0);
  CHECK(cosine(embed_of({1, 0}), embed_of({0, 1})) == 0.0);
  // 32 / (sqrt(14) * sqrt(77)), evaluated independently
  CHECK(cosine(embed_of({1, 2, 3}), embed_of({4, 5, 6})) ==
        doctest::Approx(0.974632).epsilon(1e-6));
}

TEST_CASE("cosine rejects mismatched and zero-norm inputs") {
  CHECK_THROWS_AS(cosine(embed_of({1, 2}), embed_of({1, 2, 3})), DataError);
  CHECK_THROWS_AS(cosine(embed_of({0, 0}), embed_of({1, 2})), DataError);
}

TEST_CASE("cosine is symmetric and scale invariant") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(4), b = Eigen::VectorXd::Zero(4);
    for (Eigen::Index i = 0; i < 4; ++i) {
      a[i] = static_cast<double>(rng() % 19) - 9.0;
      b[i] = static_cast<double>(rng() % 19) - 9.0;
    }
    if (a.norm() == 0.0 || b.norm() == 0.0) continue;
    Embedding ea(a), eb(b);
    CHECK(cosine(ea, eb) == cosine(eb, ea));
    double scale = 0.5 + static_cast<double>(rng() % 100);
    CHECK(cosine(Embedding(scale * a), eb) == doctest::Approx(cosine(ea, eb)).epsilon(1e-12));
  }
}

TEST_CASE("jaccard is symmetric") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::string a = random_text(rng);
    std::string b = random_text(rng);
    CHECK(jaccard(a, b) == jaccard(b, a));
  }
}

TEST_CASE("vocabulary bag-of-words provider reproduces the worked example") {
  BagOfWordsProvider provider({"a", "b", "c"});
  auto pair = fixtures::make_pair("p", "a b", "a c");
  auto features = featurize(pair, provider);
  CHECK(features.cosine == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(features.e_orig.dim() == 3);
}

TEST_CASE("featurize of identical texts gives cosine 1") {
  BagOfWordsProvider provider(Eigen::Index{32});
  auto pair = fixtures::make_pair("p", "same words here", "same words here");
  CHECK(featurize(pair, provider).cosine == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("featurize is symmetric in its embeddings") {
  BagOfWordsProvider provider(Eigen::Index{32});
  auto ab = fixtures::make_pair("p", "alpha beta", "beta gamma");
  auto ba = fixtures::make_pair("p", "beta gamma", "alpha beta");
  CHECK(featurize(ab, provider).cosine == featurize(ba, provider).cosine);
}

TEST_CASE("featurize matches the bag-of-words oracle on random short texts") {
  // vocabulary covering the generator's alphabet, so nothing hashes away
  std::vector<std::string> vocabulary;
  for (char c = 'a'; c <= 'f'; ++c) vocabulary.emplace_back(1, c);
  BagOfWordsProvider provider(vocabulary);

  std::mt19937 rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    std::string a = random_text(rng);
    std::string b = random_text(rng);
    auto pair = fixtures::make_pair("p", a, b);
    CHECK(featurize(pair, provider).cosine ==
          doctest::Approx(oracle::bow_cosine(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("provider failure carries the pair id") {
  BagOfWordsProvider provider({"only", "these", "words"});
  auto pair = fixtures::make_pair("pair-42", "nothing matches", "only these");
  try {
    featurize(pair, provider);
    FAIL("expected ProviderError");
  } catch (const ProviderError& ex) {
    CHECK(std::string(ex.what()).find("pair-42") != std::string::npos);
  }
}

TEST_CASE("bag-of-words embeddings are deterministic and unit length") {
  BagOfWordsProvider provider(Eigen::Index{64});
  auto first = provider.embed("the quick brown fox");
  auto second = provider.embed("the quick brown fox");
  CHECK(first.values() == second.values());
  CHECK(first.values().norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(provider.provider_id() == "bow-hash:64");
}

TEST_CASE("vocabulary providers fingerprint their vocabulary") {
  BagOfWordsProvider one({"a", "b"});
  BagOfWordsProvider same({"a", "b"});
  BagOfWordsProvider other({"a", "c"});
  CHECK(one.provider_id() == same.provider_id());
  CHECK(one.provider_id() != other.provider_id());
}

TEST_CASE("remote embedding provider speaks the wire shape") {
  httplib::Server server;
  nlohmann::json seen;
  std::mutex seen_mutex;
  // endpoint carries a path prefix, like the usual /v1 deployments
  server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(seen_mutex);
      seen = nlohmann::json::parse(req.body);
    }
    nlohmann::json reply{{"data", nlohmann::json::array({nlohmann::json{
                                      {"embedding", nlohmann::json::array({0.1, 0.2, 0.3})}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteEmbeddingProvider provider("http://127.0.0.1:" + std::to_string(port) + "/v1",
                                   "embed-model", 3);
  auto embedding = provider.embed("payload text");
  CHECK(embedding.dim() == 3);
  CHECK(embedding.values()[1] == doctest::Approx(0.2));
  {
    std::lock_guard lock(seen_mutex);
    CHECK(seen.at("model") == "embed-model");
    REQUIRE(seen.at("input").is_array());
    CHECK(seen.at("input")[0] == "payload text");
  }

  server.stop();
  server_thread.join();
}
