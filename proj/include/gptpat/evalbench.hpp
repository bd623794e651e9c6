#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gptpat/core.hpp"
#include "gptpat/detector.hpp"

namespace gptpat {

// Removes every occurrence of each indicator phrase (case-insensitive
// substring match), collapses the double spaces this leaves behind and trims.
// Idempotent.
std::string clean(const std::string& text, const std::vector<std::string>& indicator_phrases);

// One phrase per line; blank lines and lines starting with '#' are ignored.
std::vector<std::string> load_indicator_phrases(const std::filesystem::path& path);

struct SplitSpec {
  double train_ratio = 0.7;
  double val_ratio = 0.15;
  double test_ratio = 0.15;
  std::uint64_t seed = 0;
  bool stratify_by_label = true;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Deterministic partition with |train| = floor(n * train_ratio) etc. and the
// remainder assigned train-first. Stratified mode keeps per-label proportions
// as close as the global sizes allow and needs >= 3 samples per class.
// labels[i] is ignored unless stratifying, where every entry must be set.
SplitIndices split_indices(std::size_t n, const std::vector<std::optional<Label>>& labels,
                           const SplitSpec& spec);

struct SplitResult {
  std::vector<TextSample> train;
  std::vector<TextSample> val;
  std::vector<TextSample> test;
};

SplitResult split(const std::vector<TextSample>& samples, const SplitSpec& spec);

// Machine is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  void add(Label truth, Label predicted);
  std::size_t total() const { return tp + fp + fn + tn; }
};

struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// accuracy, precision, recall, f1 with the zero-denominator conventions:
// no predicted positives -> precision 1 when there are also no missed
// positives, else 0; no actual positives -> recall 1 when there are no false
// positives, else 0; f1 is 0 when precision + recall is 0.
MetricSet metrics(const ConfusionMatrix& cm);

// Twenty uniform bins over the observed score range, counts per class.
struct SimilarityHistogram {
  std::vector<double> bin_start;
  std::vector<double> bin_end;
  std::vector<std::size_t> human_count;
  std::vector<std::size_t> machine_count;
};

struct EvalReport {
  std::string dataset_tag;
  std::size_t n = 0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ArchKind arch = ArchKind::TST;
  std::string model_version;
  ConfusionMatrix confusion;
  std::optional<SimilarityHistogram> similarity_histogram;
  std::vector<std::string> excluded;  // pair ids skipped on prediction failure
};

struct EvalOptions {
  bool skip_failures = false;   // otherwise the first prediction failure aborts
  bool with_histogram = true;   // Jaccard scores for TST, cosine otherwise
  int histogram_bins = 20;
};

// Runs predict on every labeled pair and aggregates the confusion matrix,
// metrics and per-class similarity histogram.
EvalReport evaluate(const DetectorModel& model, const std::vector<PairRecord>& pairs,
                    EmbeddingProvider& provider, const EvalOptions& options = {});

nlohmann::json to_json(const EvalReport& report);
void write_report_json(const std::filesystem::path& path, const EvalReport& report);
// CSV columns: bin_start, bin_end, human_count, machine_count.
void write_histogram_csv(const std::filesystem::path& path, const SimilarityHistogram& histogram);

enum class GenPromptKind { CCNews, ACLAbs };

// Dataset-construction prompts. CCNews needs the opening description; ACLAbs
// takes the title alone.
std::string build_generation_prompt(GenPromptKind kind, const std::string& title,
                                    const std::optional<std::string>& desc = std::nullopt);

// First 20% of the text by whitespace words (rounded down, at least one),
// preserving the original bytes between the words.
std::string extract_desc(const std::string& human_text);

}  // namespace gptpat
