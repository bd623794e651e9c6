#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "gptpat/core.hpp"

namespace gptpat {

// |tokens(a) & tokens(b)| / |tokens(a) | tokens(b)| over lowercased whitespace
// token sets. Both sets empty -> 1.
double jaccard(const std::string& a, const std::string& b);

// dot(e1,e2) / (|e1||e2|), clamped to [-1, 1]. Throws DataError on dimension
// mismatch or a zero-norm vector (a zero norm signals a broken provider).
double cosine(const Embedding& e1, const Embedding& e2);

// Siamese contract: one provider instance embeds both branches, so the two
// embeddings always come from the same weights.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Embedding embed(const std::string& text) = 0;
  virtual Eigen::Index dim() const = 0;
  virtual std::string provider_id() const = 0;
  // Providers that cannot take concurrent embed calls return false and the
  // pipeline serializes around them.
  virtual bool thread_safe() const { return false; }
};

PairFeatures featurize(const PairRecord& pair, EmbeddingProvider& provider);

// Deterministic synthetic provider: text -> L2-normalized bag-of-words vector,
// either over an explicit vocabulary (one dimension per word) or over hashed
// buckets. Tokens are lowercased whitespace runs.
class BagOfWordsProvider : public EmbeddingProvider {
 public:
  explicit BagOfWordsProvider(std::vector<std::string> vocabulary);
  explicit BagOfWordsProvider(Eigen::Index hashed_dim);

  Embedding embed(const std::string& text) override;
  Eigen::Index dim() const override { return dim_; }
  std::string provider_id() const override { return provider_id_; }
  bool thread_safe() const override { return true; }

 private:
  std::unordered_map<std::string, Eigen::Index> vocab_index_;  // empty in hashed mode
  Eigen::Index dim_;
  std::string provider_id_;
};

// Client for an embedding endpoint speaking the OpenAI-compatible JSON shape:
// request {"input":[texts],"model":id}, response {"data":[{"embedding":[...]}]}.
class RemoteEmbeddingProvider : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(std::string endpoint, std::string model_id, Eigen::Index dim,
                          std::string api_key = {});
  ~RemoteEmbeddingProvider() override;

  Embedding embed(const std::string& text) override;
  Eigen::Index dim() const override { return dim_; }
  std::string provider_id() const override;
  // one connection per call, no shared mutable state
  bool thread_safe() const override { return true; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Eigen::Index dim_;
};

}  // namespace gptpat
