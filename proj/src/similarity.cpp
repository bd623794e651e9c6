#include "gptpat/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "internal/hash.hpp"
#include "internal/strings.hpp"
#include "internal/url.hpp"

namespace gptpat {

namespace {

std::unordered_set<std::string> token_set(const std::string& text) {
  std::unordered_set<std::string> set;
  for (auto& token : internal::whitespace_tokens(text)) {
    set.insert(internal::to_lower_ascii(token));
  }
  return set;
}

}  // namespace

double jaccard(const std::string& a, const std::string& b) {
  auto set_a = token_set(a);
  auto set_b = token_set(b);
  if (set_a.empty() && set_b.empty()) return 1.0;
  std::size_t intersection = 0;
  for (const auto& token : set_a) {
    if (set_b.count(token) > 0) ++intersection;
  }
  std::size_t uni = set_a.size() + set_b.size() - intersection;
  return static_cast<double>(intersection) / static_cast<double>(uni);
}

double cosine(const Embedding& e1, const Embedding& e2) {
  if (e1.dim() != e2.dim())
    throw DataError("cosine: dimension mismatch (" + std::to_string(e1.dim()) + " vs " +
                    std::to_string(e2.dim()) + ")");
  double norm1 = e1.values().norm();
  double norm2 = e2.values().norm();
  if (norm1 == 0.0 || norm2 == 0.0) throw DataError("cosine: zero-norm embedding");
  double value = e1.values().dot(e2.values()) / (norm1 * norm2);
  return std::clamp(value, -1.0, 1.0);
}

PairFeatures featurize(const PairRecord& pair, EmbeddingProvider& provider) {
  try {
    PairFeatures features;
    features.e_orig = provider.embed(pair.original.body);
    features.e_reans = provider.embed(pair.re_answer);
    features.cosine = cosine(features.e_orig, features.e_reans);
    return features;
  } catch (const Error& ex) {
    throw ProviderError("featurize failed for pair \"" + pair.original.id + "\": " + ex.what());
  }
}

BagOfWordsProvider::BagOfWordsProvider(std::vector<std::string> vocabulary)
    : dim_(static_cast<Eigen::Index>(vocabulary.size())) {
  if (vocabulary.empty()) throw ConfigError("bag-of-words vocabulary is empty");
  // Fingerprint the vocabulary so models remember which provider built them.
  std::string joined;
  for (Eigen::Index i = 0; i < dim_; ++i) {
    std::string word = internal::to_lower_ascii(vocabulary[i]);
    vocab_index_.emplace(word, i);
    joined += word;
    joined += '\n';
  }
  provider_id_ = "bow-vocab:" + internal::sha256_hex(joined).substr(0, 12);
}

BagOfWordsProvider::BagOfWordsProvider(Eigen::Index hashed_dim) : dim_(hashed_dim) {
  if (hashed_dim <= 0) throw ConfigError("bag-of-words hashed dimension must be positive");
  provider_id_ = "bow-hash:" + std::to_string(hashed_dim);
}

Embedding BagOfWordsProvider::embed(const std::string& text) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(dim_);
  if (!vocab_index_.empty()) {
    for (auto& token : internal::whitespace_tokens(text)) {
      auto it = vocab_index_.find(internal::to_lower_ascii(token));
      if (it != vocab_index_.end()) counts[it->second] += 1.0;
    }
  } else {
    for (auto& token : internal::whitespace_tokens(text)) {
      auto bucket = internal::fnv1a64(internal::to_lower_ascii(token)) %
                    static_cast<std::uint64_t>(dim_);
      counts[static_cast<Eigen::Index>(bucket)] += 1.0;
    }
  }
  double norm = counts.norm();
  if (norm == 0.0)
    throw ProviderError("bag-of-words embedding is zero: no vocabulary token in text");
  return Embedding(counts / norm);
}

struct RemoteEmbeddingProvider::Impl {
  std::string endpoint;
  std::string model_id;
  std::string api_key;
};

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::string endpoint, std::string model_id,
                                                 Eigen::Index dim, std::string api_key)
    : impl_(new Impl{std::move(endpoint), std::move(model_id), std::move(api_key)}), dim_(dim) {
  if (dim_ <= 0) throw ConfigError("embedding dimension must be positive");
}

RemoteEmbeddingProvider::~RemoteEmbeddingProvider() = default;

std::string RemoteEmbeddingProvider::provider_id() const {
  return "remote:" + impl_->model_id;
}

Embedding RemoteEmbeddingProvider::embed(const std::string& text) {
  nlohmann::json body{{"input", nlohmann::json::array({text})}, {"model", impl_->model_id}};

  auto [base, prefix] = internal::split_base_url(impl_->endpoint);
  httplib::Client client(base);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!impl_->api_key.empty()) headers.emplace("Authorization", "Bearer " + impl_->api_key);

  auto result = client.Post(prefix + "/embeddings", headers, body.dump(), "application/json");
  if (!result) throw BackendError(BackendError::Kind::Transport,
                                  "embedding endpoint unreachable: " + impl_->endpoint);
  if (result->status == 401 || result->status == 403)
    throw BackendError(BackendError::Kind::Auth, "embedding endpoint rejected credentials");
  if (result->status != 200)
    throw BackendError(BackendError::Kind::ServerError,
                       "embedding endpoint returned HTTP " + std::to_string(result->status));

  try {
    auto payload = nlohmann::json::parse(result->body);
    const auto& values = payload.at("data").at(0).at("embedding");
    Eigen::VectorXd v(values.size());
    Eigen::Index i = 0;
    for (const auto& entry : values) v[i++] = entry.get<double>();
    if (v.size() != dim_)
      throw BackendError(BackendError::Kind::Malformed,
                         "embedding endpoint returned dimension " + std::to_string(v.size()) +
                             ", expected " + std::to_string(dim_));
    return Embedding(std::move(v));
  } catch (const nlohmann::json::exception& ex) {
    throw BackendError(BackendError::Kind::Malformed,
                       std::string("malformed embedding response: ") + ex.what());
  }
}

}  // namespace gptpat
