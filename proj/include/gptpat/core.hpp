#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gptpat/errors.hpp"

namespace gptpat {

// Machine is the positive class in every metric.
enum class Label { Human, Machine };

inline int to_numeric(Label label) { return label == Label::Machine ? 1 : 0; }

inline Label label_from_numeric(int value) {
  if (value == 0) return Label::Human;
  if (value == 1) return Label::Machine;
  throw DataError("label numeric value must be 0 or 1, got " + std::to_string(value));
}

std::string to_string(Label label);
Label label_from_string(const std::string& text);

// Number of maximal non-whitespace runs (ASCII whitespace).
std::size_t word_count(const std::string& body);

// A labeled or unlabeled text under scrutiny.
struct TextSample {
  std::string id;
  std::string body;
  std::optional<Label> label;
  std::string dataset_tag;
  std::size_t word_count = 0;  // whitespace word count of body

  TextSample() = default;
  TextSample(std::string id, std::string body, std::optional<Label> label = std::nullopt,
             std::string dataset_tag = {});
};

// One question with at least one of the two answer sides present.
struct QARecord {
  std::string question;
  std::optional<std::string> human_answer;
  std::optional<std::string> machine_answer;
  std::string source;
};

// Original text plus generated question and re-answer with provenance.
struct PairRecord {
  TextSample original;
  std::string generated_question;
  std::string re_answer;
  std::string model_id;
  double temperature = 0.2;
  std::string created_at;  // ISO-8601 UTC
};

// Fixed-length real vector; all entries finite.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(Eigen::VectorXd values);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index dim() const { return values_.size(); }

 private:
  Eigen::VectorXd values_;
};

// The classifier input triple (e(T), e(T'), sigma). Built by similarity::featurize,
// which guarantees cosine == cosine(e_orig, e_reans).
struct PairFeatures {
  Embedding e_orig;
  Embedding e_reans;
  double cosine = 0.0;
};

// --- JSON record shapes (field names are part of the contract) ---

nlohmann::json to_json(const TextSample& sample);
TextSample sample_from_json(const nlohmann::json& j);

nlohmann::json to_json(const QARecord& record);
QARecord qa_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PairRecord& record);
PairRecord pair_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Embedding& embedding);
Embedding embedding_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PairFeatures& features);
PairFeatures features_from_json(const nlohmann::json& j);

// --- JSON-Lines I/O ---

std::vector<TextSample> read_samples_jsonl(const std::filesystem::path& path);
std::vector<PairRecord> read_pairs_jsonl(const std::filesystem::path& path);
void write_samples_jsonl(const std::filesystem::path& path, const std::vector<TextSample>& samples);
void write_pairs_jsonl(const std::filesystem::path& path, const std::vector<PairRecord>& pairs);

}  // namespace gptpat
