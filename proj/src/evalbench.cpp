#include "gptpat/evalbench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "gptpat/gateway.hpp"
#include "internal/rng.hpp"
#include "internal/strings.hpp"

namespace gptpat {

using nlohmann::json;

namespace {

// Removes every (case-insensitive) occurrence of the phrase, keeping the
// lowercase shadow aligned. Returns whether anything was removed.
bool remove_phrase(std::string& text, std::string& lower, const std::string& phrase_lower) {
  bool removed = false;
  std::size_t pos = 0;
  while ((pos = lower.find(phrase_lower, pos)) != std::string::npos) {
    text.erase(pos, phrase_lower.size());
    lower.erase(pos, phrase_lower.size());
    removed = true;
  }
  return removed;
}

bool collapse_double_spaces(std::string& text) {
  bool collapsed = false;
  std::size_t pos = 0;
  while ((pos = text.find("  ", pos)) != std::string::npos) {
    text.erase(pos, 1);
    collapsed = true;
  }
  return collapsed;
}

}  // namespace

std::string clean(const std::string& text, const std::vector<std::string>& indicator_phrases) {
  std::vector<std::string> phrases;
  for (const auto& phrase : indicator_phrases) {
    if (!phrase.empty()) phrases.push_back(internal::to_lower_ascii(phrase));
  }

  std::string result = text;
  // Iterate to a fixpoint: a removal can expose a new phrase occurrence, and
  // collapsing spaces can as well.
  bool changed = true;
  while (changed) {
    changed = false;
    std::string lower = internal::to_lower_ascii(result);
    for (const auto& phrase : phrases) changed |= remove_phrase(result, lower, phrase);
    changed |= collapse_double_spaces(result);
  }
  return internal::trim(result);
}

std::vector<std::string> load_indicator_phrases(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open phrase list " + path.string());
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    phrases.push_back(line);
  }
  return phrases;
}

namespace {

struct SplitSizes {
  std::size_t train = 0, val = 0, test = 0;
};

// floor(n * ratio) per split. The epsilon absorbs binary rounding of ratios
// like 0.7 * 10.
SplitSizes floor_sizes(std::size_t n, const SplitSpec& spec) {
  SplitSizes sizes;
  sizes.train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train_ratio + 1e-9));
  sizes.val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val_ratio + 1e-9));
  sizes.test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test_ratio + 1e-9));
  return sizes;
}

// Floors plus the remainder assigned train-first.
SplitSizes target_sizes(std::size_t n, const SplitSpec& spec) {
  SplitSizes sizes = floor_sizes(n, spec);
  std::size_t leftover = n - (sizes.train + sizes.val + sizes.test);
  std::size_t* order[] = {&sizes.train, &sizes.val, &sizes.test};
  for (std::size_t i = 0; i < leftover; ++i) ++*order[i % 3];
  return sizes;
}

void validate_ratios(const SplitSpec& spec) {
  if (spec.train_ratio <= 0 || spec.val_ratio <= 0 || spec.test_ratio <= 0)
    throw ConfigError("split ratios must be positive");
  if (std::abs(spec.train_ratio + spec.val_ratio + spec.test_ratio - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");
}

}  // namespace

SplitIndices split_indices(std::size_t n, const std::vector<std::optional<Label>>& labels,
                           const SplitSpec& spec) {
  validate_ratios(spec);
  if (n == 0) throw DataError("cannot split an empty sample set");

  SplitIndices result;
  internal::DeterministicRng rng(spec.seed);

  if (!spec.stratify_by_label) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    SplitSizes sizes = target_sizes(n, spec);
    result.train.assign(order.begin(), order.begin() + sizes.train);
    result.val.assign(order.begin() + sizes.train, order.begin() + sizes.train + sizes.val);
    result.test.assign(order.begin() + sizes.train + sizes.val, order.end());
    return result;
  }

  if (labels.size() != n) throw DataError("stratified split needs a label per sample");
  std::vector<std::size_t> human_indices, machine_indices;
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels[i]) throw DataError("stratified split found an unlabeled sample");
    (*labels[i] == Label::Machine ? machine_indices : human_indices).push_back(i);
  }
  for (const auto* group : {&human_indices, &machine_indices}) {
    if (!group->empty() && group->size() < 3)
      throw DataError("stratified split needs at least 3 samples per class");
  }

  // Global sizes follow the floor-then-remainder rule; classes fill their
  // own floors first and the per-class leftovers top up whichever split
  // still has room, train first.
  SplitSizes global = target_sizes(n, spec);
  std::size_t filled_train = 0, filled_val = 0, filled_test = 0;
  std::vector<std::size_t> leftovers;

  for (auto* group : {&human_indices, &machine_indices}) {
    if (group->empty()) continue;
    rng.shuffle(*group);
    SplitSizes sizes = floor_sizes(group->size(), spec);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < sizes.train; ++i) result.train.push_back((*group)[cursor++]);
    for (std::size_t i = 0; i < sizes.val; ++i) result.val.push_back((*group)[cursor++]);
    for (std::size_t i = 0; i < sizes.test; ++i) result.test.push_back((*group)[cursor++]);
    while (cursor < group->size()) leftovers.push_back((*group)[cursor++]);
  }

  filled_train = result.train.size();
  filled_val = result.val.size();
  filled_test = result.test.size();
  for (std::size_t index : leftovers) {
    if (filled_train < global.train) {
      result.train.push_back(index);
      ++filled_train;
    } else if (filled_val < global.val) {
      result.val.push_back(index);
      ++filled_val;
    } else {
      result.test.push_back(index);
      ++filled_test;
    }
  }
  return result;
}

SplitResult split(const std::vector<TextSample>& samples, const SplitSpec& spec) {
  std::vector<std::optional<Label>> labels;
  labels.reserve(samples.size());
  for (const auto& sample : samples) labels.push_back(sample.label);
  SplitIndices indices = split_indices(samples.size(), labels, spec);

  SplitResult result;
  for (std::size_t i : indices.train) result.train.push_back(samples[i]);
  for (std::size_t i : indices.val) result.val.push_back(samples[i]);
  for (std::size_t i : indices.test) result.test.push_back(samples[i]);
  return result;
}

void ConfusionMatrix::add(Label truth, Label predicted) {
  if (truth == Label::Machine) {
    predicted == Label::Machine ? ++tp : ++fn;
  } else {
    predicted == Label::Machine ? ++fp : ++tn;
  }
}

MetricSet metrics(const ConfusionMatrix& cm) {
  std::size_t n = cm.total();
  if (n == 0) throw DataError("metrics over an empty confusion matrix");

  MetricSet m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(n);
  if (cm.tp + cm.fp > 0) {
    m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  } else {
    m.precision = cm.fn == 0 ? 1.0 : 0.0;
  }
  if (cm.tp + cm.fn > 0) {
    m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  } else {
    m.recall = cm.fp == 0 ? 1.0 : 0.0;
  }
  m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
  return m;
}

namespace {

SimilarityHistogram build_histogram(const std::vector<double>& scores,
                                    const std::vector<Label>& labels, int bins) {
  SimilarityHistogram histogram;
  double lo = *std::min_element(scores.begin(), scores.end());
  double hi = *std::max_element(scores.begin(), scores.end());
  double range = hi - lo;

  histogram.bin_start.resize(bins);
  histogram.bin_end.resize(bins);
  histogram.human_count.assign(bins, 0);
  histogram.machine_count.assign(bins, 0);
  for (int b = 0; b < bins; ++b) {
    histogram.bin_start[b] = lo + range * b / bins;
    histogram.bin_end[b] = b + 1 == bins ? hi : lo + range * (b + 1) / bins;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    int b = range > 0.0
                ? std::min(bins - 1, static_cast<int>((scores[i] - lo) / range * bins))
                : 0;
    (labels[i] == Label::Machine ? histogram.machine_count : histogram.human_count)[b] += 1;
  }
  return histogram;
}

}  // namespace

EvalReport evaluate(const DetectorModel& model, const std::vector<PairRecord>& pairs,
                    EmbeddingProvider& provider, const EvalOptions& options) {
  if (pairs.empty()) throw DataError("nothing to evaluate: empty pair set");

  EvalReport report;
  report.arch = model.arch;
  report.model_version = model.model_version;
  if (model.arch != ArchKind::TST) ensure_provider_compatible(model, provider);

  std::vector<double> scores;
  std::vector<Label> score_labels;

  for (const auto& pair : pairs) {
    if (!pair.original.label)
      throw DataError("pair \"" + pair.original.id + "\" is unlabeled; evaluate needs labels");
    try {
      Label truth = *pair.original.label;
      Verdict verdict;
      double similarity;
      if (model.arch == ArchKind::TST) {
        verdict = predict(model, pair, provider);
        similarity = jaccard(pair.original.body, pair.re_answer);
      } else {
        PairFeatures features = featurize(pair, provider);
        verdict = predict_with_features(model, features);
        similarity = features.cosine;
      }
      report.confusion.add(truth, verdict.label);
      scores.push_back(similarity);
      score_labels.push_back(truth);
    } catch (const std::exception& ex) {
      if (!options.skip_failures) throw;
      report.excluded.push_back(pair.original.id);
    }
  }

  if (report.confusion.total() == 0) throw DataError("every pair failed prediction");
  MetricSet m = metrics(report.confusion);
  report.n = report.confusion.total();
  report.accuracy = m.accuracy;
  report.precision = m.precision;
  report.recall = m.recall;
  report.f1 = m.f1;

  const std::string& first_tag = pairs.front().original.dataset_tag;
  bool uniform_tag = std::all_of(pairs.begin(), pairs.end(), [&](const PairRecord& p) {
    return p.original.dataset_tag == first_tag;
  });
  report.dataset_tag = uniform_tag ? first_tag : "mixed";

  if (options.with_histogram && !scores.empty())
    report.similarity_histogram = build_histogram(scores, score_labels, options.histogram_bins);
  return report;
}

json to_json(const EvalReport& report) {
  json j{{"dataset_tag", report.dataset_tag},
         {"n", report.n},
         {"accuracy", report.accuracy},
         {"precision", report.precision},
         {"recall", report.recall},
         {"f1", report.f1},
         {"arch", to_string(report.arch)},
         {"model_version", report.model_version},
         {"confusion",
          {{"tp", report.confusion.tp},
           {"fp", report.confusion.fp},
           {"fn", report.confusion.fn},
           {"tn", report.confusion.tn}}},
         {"excluded", report.excluded}};
  if (report.similarity_histogram) {
    const auto& h = *report.similarity_histogram;
    json bins = json::array();
    for (std::size_t b = 0; b < h.bin_start.size(); ++b) {
      bins.push_back(json{{"bin_start", h.bin_start[b]},
                          {"bin_end", h.bin_end[b]},
                          {"human_count", h.human_count[b]},
                          {"machine_count", h.machine_count[b]}});
    }
    j["similarity_histogram"] = std::move(bins);
  }
  return j;
}

void write_report_json(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
}

void write_histogram_csv(const std::filesystem::path& path, const SimilarityHistogram& histogram) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "bin_start,bin_end,human_count,machine_count\n";
  for (std::size_t b = 0; b < histogram.bin_start.size(); ++b) {
    out << histogram.bin_start[b] << ',' << histogram.bin_end[b] << ',' << histogram.human_count[b]
        << ',' << histogram.machine_count[b] << '\n';
  }
}

std::string build_generation_prompt(GenPromptKind kind, const std::string& title,
                                    const std::optional<std::string>& desc) {
  if (kind == GenPromptKind::CCNews) {
    if (!desc) throw DataError("the news generation prompt needs the opening description");
    std::string rendered = prompt_template(PromptKind::CCNewsGen).template_text;
    rendered.replace(rendered.find("<TITLE>"), 7, title);
    rendered.replace(rendered.find("<DESC>"), 6, *desc);
    return rendered;
  }
  std::string rendered = prompt_template(PromptKind::ACLAbsGen).template_text;
  rendered.replace(rendered.find("<TITLE>"), 7, title);
  return rendered;
}

std::string extract_desc(const std::string& human_text) {
  // Offsets of token ends so the original inter-word bytes survive.
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  while (i < human_text.size()) {
    while (i < human_text.size() && internal::is_space(human_text[i])) ++i;
    std::size_t start = i;
    while (i < human_text.size() && !internal::is_space(human_text[i])) ++i;
    if (i > start) spans.emplace_back(start, i);
  }
  if (spans.empty()) throw DataError("cannot extract a description from text without words");
  std::size_t keep = std::max<std::size_t>(1, spans.size() / 5);
  return human_text.substr(spans.front().first, spans[keep - 1].second - spans.front().first);
}

}  // namespace gptpat
