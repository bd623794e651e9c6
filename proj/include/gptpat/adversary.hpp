#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "gptpat/detector.hpp"
#include "gptpat/pipeline.hpp"

namespace gptpat {

enum class AttackKind { Retranslate, Polish, SynonymSub };

std::string to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& text);

struct AttackSpec {
  AttackKind kind = AttackKind::SynonymSub;
  std::string pivot_language = "zh";  // Retranslate
  double substitution_prob = 0.5;     // SynonymSub
  std::uint64_t seed = 0;
};

class TranslationClient {
 public:
  virtual ~TranslationClient() = default;
  virtual std::string translate(const std::string& text, const std::string& from,
                                const std::string& to) = 0;
};

// source -> pivot -> source, two client calls.
std::string retranslate(const std::string& text, TranslationClient& client,
                        const std::string& pivot, const std::string& source = "en");

inline constexpr std::string_view kDefaultPolishPrompt =
    "Please polish the following sentence, keeping its meaning: <SENTENCE>";

struct SentenceSplit {
  std::string first;
  std::string rest;
};

// First sentence ends at the first ., ! or ? followed by whitespace or the
// end of the text. Without a terminator the first 20 words stand in for the
// sentence.
SentenceSplit split_first_sentence(const std::string& text);

// Sends the first sentence through the chat backend with the polish prompt
// and rejoins it with the untouched remainder. Bytes after the sentence
// boundary never change.
std::string polish_first_sentence(const std::string& text, Gateway& gateway,
                                  const PipelineConfig& config,
                                  const std::string& prompt_template = std::string(kDefaultPolishPrompt));

// word -> synonyms, most preferred first. Lookup is on the lowercased token.
using SynonymLexicon = std::unordered_map<std::string, std::vector<std::string>>;

// Flat file: word TAB comma-separated synonyms. '#' lines are comments.
SynonymLexicon load_lexicon(const std::filesystem::path& path);

// One seeded Bernoulli draw per lexicon-eligible token, in token order; a hit
// swaps in the first synonym with the original token's first-letter casing.
std::string synonym_substitute(const std::string& text, const SynonymLexicon& lexicon, double prob,
                               std::uint64_t seed);

struct AttackReport {
  std::string attack;
  double before = 0.0;
  double after = 0.0;
  double drop_rate = 0.0;
  // Polishing mixes the classes differently, so per-class accuracies are
  // always reported alongside the combined ones.
  double before_machine = 0.0, before_human = 0.0;
  double after_machine = 0.0, after_human = 0.0;
  std::vector<std::string> excluded;
};

struct AttackResources {
  Gateway* gateway = nullptr;  // required: attacked texts re-enter the full pipeline
  PipelineConfig pipeline;
  TranslationClient* translator = nullptr;   // Retranslate
  const SynonymLexicon* lexicon = nullptr;   // SynonymSub
  std::string polish_prompt = std::string(kDefaultPolishPrompt);
};

// before: accuracy on the given pairs. Then every original text is perturbed,
// re-run through question generation and re-answering, and re-classified.
// drop_rate = before - after. Per-sample failures end up in `excluded`.
AttackReport attack_eval(const DetectorModel& model, const std::vector<PairRecord>& pairs,
                         const AttackSpec& spec, const AttackResources& resources,
                         EmbeddingProvider& provider);

nlohmann::json to_json(const AttackReport& report);
void write_attack_report(const std::filesystem::path& path, const AttackReport& report);

}  // namespace gptpat
