#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "gptpat/core.hpp"

namespace fixtures {

inline gptpat::PairRecord make_pair(const std::string& id, const std::string& body,
                                    const std::string& re_answer,
                                    std::optional<gptpat::Label> label = std::nullopt,
                                    const std::string& tag = "test") {
  gptpat::PairRecord record;
  record.original = gptpat::TextSample(id, body, label, tag);
  record.generated_question = "Q " + id;
  record.re_answer = re_answer;
  record.model_id = "mock";
  record.temperature = 0.2;
  record.created_at = "2024-01-01T00:00:00Z";
  return record;
}

// Synthetic corpus with controlled body/re-answer vocabulary sharing.
//
// Every body holds ten distinct words: eight shared anchor words, the sample
// id itself (which makes every body unique by construction) and one
// sample-specific word. Machine re-answers keep nine of the ten body words
// (90% sharing, pair cosine 0.9 under a bag-of-words provider); human
// re-answers keep three and fill up from a separate noise pool (30% sharing,
// cosine 0.3). The vocabulary also carries a scrambled twin "z<w>" for every
// anchor/specific word, and `scrambler` maps each word onto its twin, so a
// full synonym substitution moves a body out of the vocabulary its re-answer
// uses.
struct SyntheticCorpus {
  std::vector<gptpat::TextSample> samples;
  std::unordered_map<std::string, std::string> reanswers;  // id -> crafted re-answer
  std::vector<std::string> vocabulary;                     // covers bodies, re-answers, twins
  std::unordered_map<std::string, std::vector<std::string>> scrambler;
};

inline SyntheticCorpus make_synthetic_corpus(int per_class, std::uint64_t seed) {
  constexpr int kAnchors = 8;
  constexpr int kSpecifics = 40;
  constexpr int kNoise = 20;

  SyntheticCorpus corpus;
  std::vector<std::string> anchors, specifics, noise;
  for (int i = 0; i < kAnchors; ++i) anchors.push_back("a" + std::to_string(i));
  for (int i = 0; i < kSpecifics; ++i) specifics.push_back("s" + std::to_string(i));
  for (int i = 0; i < kNoise; ++i) noise.push_back("n" + std::to_string(i));

  corpus.vocabulary.insert(corpus.vocabulary.end(), anchors.begin(), anchors.end());
  corpus.vocabulary.insert(corpus.vocabulary.end(), specifics.begin(), specifics.end());
  corpus.vocabulary.insert(corpus.vocabulary.end(), noise.begin(), noise.end());
  for (const auto& word : anchors) {
    corpus.vocabulary.push_back("z" + word);
    corpus.scrambler[word] = {"z" + word};
  }
  for (const auto& word : specifics) {
    corpus.vocabulary.push_back("z" + word);
    corpus.scrambler[word] = {"z" + word};
  }

  std::mt19937_64 rng(seed);
  auto pick_distinct = [&](int count, int pool_size) {
    std::vector<int> pool(pool_size);
    for (int i = 0; i < pool_size; ++i) pool[i] = i;
    for (int i = 0; i < count; ++i) {
      int j = i + static_cast<int>(rng() % (pool_size - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
  };
  auto join = [](const std::vector<std::string>& words) {
    std::string text;
    for (const auto& word : words) {
      if (!text.empty()) text += ' ';
      text += word;
    }
    return text;
  };

  for (int i = 0; i < per_class; ++i) {
    std::string id = "m" + std::to_string(i);
    corpus.vocabulary.push_back(id);
    auto chosen = pick_distinct(2, kSpecifics);  // one body specific, one fresh
    std::vector<std::string> body_words = anchors;
    body_words.push_back(id);
    body_words.push_back(specifics[chosen[0]]);
    // keep the anchors and the id, swap the specific for a fresh one
    std::vector<std::string> reans_words = anchors;
    reans_words.push_back(id);
    reans_words.push_back(specifics[chosen[1]]);

    corpus.samples.emplace_back(id, join(body_words), gptpat::Label::Machine, "synthetic");
    corpus.reanswers[id] = join(reans_words);
  }

  for (int i = 0; i < per_class; ++i) {
    std::string id = "h" + std::to_string(i);
    corpus.vocabulary.push_back(id);
    std::vector<std::string> body_words = anchors;
    body_words.push_back(id);
    body_words.push_back(specifics[pick_distinct(1, kSpecifics)[0]]);
    // keep three anchors, fill with seven noise words
    std::vector<std::string> reans_words(anchors.begin(), anchors.begin() + 3);
    for (int k : pick_distinct(7, kNoise)) reans_words.push_back(noise[k]);

    corpus.samples.emplace_back(id, join(body_words), gptpat::Label::Human, "synthetic");
    corpus.reanswers[id] = join(reans_words);
  }
  return corpus;
}

// Self-cleaning unique temp directory.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (prefix + "_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
