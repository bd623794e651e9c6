#include "gptpat/core.hpp"

#include <cmath>
#include <fstream>

#include "internal/strings.hpp"

namespace gptpat {

using nlohmann::json;

std::string to_string(Label label) { return label == Label::Machine ? "machine" : "human"; }

Label label_from_string(const std::string& text) {
  if (text == "human") return Label::Human;
  if (text == "machine") return Label::Machine;
  throw DataError("label must be \"human\" or \"machine\", got \"" + text + "\"");
}

std::size_t word_count(const std::string& body) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : body) {
    if (internal::is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

TextSample::TextSample(std::string id_in, std::string body_in, std::optional<Label> label_in,
                       std::string dataset_tag_in)
    : id(std::move(id_in)),
      body(std::move(body_in)),
      label(label_in),
      dataset_tag(std::move(dataset_tag_in)),
      word_count(gptpat::word_count(body)) {}

Embedding::Embedding(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw DataError("embedding must have positive dimension");
  if (!values_.allFinite()) throw DataError("embedding contains non-finite entries");
}

json to_json(const TextSample& sample) {
  json j{{"id", sample.id}, {"body", sample.body}, {"dataset_tag", sample.dataset_tag}};
  if (sample.label) j["label"] = to_string(*sample.label);
  return j;
}

TextSample sample_from_json(const json& j) {
  TextSample sample(j.at("id").get<std::string>(), j.at("body").get<std::string>(), std::nullopt,
                    j.value("dataset_tag", std::string{}));
  if (j.contains("label") && !j.at("label").is_null()) {
    sample.label = label_from_string(j.at("label").get<std::string>());
  }
  return sample;
}

json to_json(const QARecord& record) {
  json j{{"question", record.question}, {"source", record.source}};
  if (record.human_answer) j["human_answer"] = *record.human_answer;
  if (record.machine_answer) j["machine_answer"] = *record.machine_answer;
  return j;
}

QARecord qa_from_json(const json& j) {
  QARecord record;
  record.question = j.at("question").get<std::string>();
  record.source = j.value("source", std::string{});
  if (j.contains("human_answer")) record.human_answer = j.at("human_answer").get<std::string>();
  if (j.contains("machine_answer"))
    record.machine_answer = j.at("machine_answer").get<std::string>();
  if (!record.human_answer && !record.machine_answer)
    throw DataError("QA record needs at least one of human_answer / machine_answer");
  return record;
}

json to_json(const PairRecord& record) {
  return json{{"original", to_json(record.original)},
              {"generated_question", record.generated_question},
              {"re_answer", record.re_answer},
              {"model_id", record.model_id},
              {"temperature", record.temperature},
              {"created_at", record.created_at}};
}

PairRecord pair_from_json(const json& j) {
  PairRecord record;
  record.original = sample_from_json(j.at("original"));
  record.generated_question = j.at("generated_question").get<std::string>();
  record.re_answer = j.at("re_answer").get<std::string>();
  record.model_id = j.at("model_id").get<std::string>();
  record.temperature = j.at("temperature").get<double>();
  record.created_at = j.value("created_at", std::string{});
  if (record.generated_question.empty() || record.re_answer.empty())
    throw DataError("pair record for \"" + record.original.id +
                    "\" has an empty generated_question or re_answer");
  return record;
}

json to_json(const Embedding& embedding) {
  json values = json::array();
  for (Eigen::Index i = 0; i < embedding.dim(); ++i) values.push_back(embedding.values()[i]);
  return json{{"values", std::move(values)}};
}

Embedding embedding_from_json(const json& j) {
  const auto& values = j.at("values");
  Eigen::VectorXd v(values.size());
  Eigen::Index i = 0;
  for (const auto& entry : values) v[i++] = entry.get<double>();
  return Embedding(std::move(v));
}

json to_json(const PairFeatures& features) {
  return json{{"e_orig", to_json(features.e_orig)},
              {"e_reans", to_json(features.e_reans)},
              {"cosine", features.cosine}};
}

PairFeatures features_from_json(const json& j) {
  PairFeatures features;
  features.e_orig = embedding_from_json(j.at("e_orig"));
  features.e_reans = embedding_from_json(j.at("e_reans"));
  features.cosine = j.at("cosine").get<double>();
  if (features.e_orig.dim() != features.e_reans.dim())
    throw DataError("pair features embeddings differ in dimension");
  return features;
}

namespace {

template <typename Record, typename Parser>
std::vector<Record> read_jsonl(const std::filesystem::path& path, Parser parse) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Record> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (internal::trim(line).empty()) continue;
    try {
      records.push_back(parse(json::parse(line)));
    } catch (const json::exception& ex) {
      throw DataError(path.string() + ": line " + std::to_string(line_number) + ": " + ex.what());
    } catch (const DataError& ex) {
      throw DataError(path.string() + ": line " + std::to_string(line_number) + ": " + ex.what());
    }
  }
  return records;
}

template <typename Record>
void write_jsonl(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& record : records) out << to_json(record).dump() << '\n';
}

}  // namespace

std::vector<TextSample> read_samples_jsonl(const std::filesystem::path& path) {
  return read_jsonl<TextSample>(path, [](const json& j) { return sample_from_json(j); });
}

std::vector<PairRecord> read_pairs_jsonl(const std::filesystem::path& path) {
  return read_jsonl<PairRecord>(path, [](const json& j) { return pair_from_json(j); });
}

void write_samples_jsonl(const std::filesystem::path& path, const std::vector<TextSample>& samples) {
  write_jsonl(path, samples);
}

void write_pairs_jsonl(const std::filesystem::path& path, const std::vector<PairRecord>& pairs) {
  write_jsonl(path, pairs);
}

}  // namespace gptpat
