#include "gptpat/adversary.hpp"

#include <cctype>
#include <fstream>

#include "internal/hash.hpp"
#include "internal/rng.hpp"
#include "internal/strings.hpp"

namespace gptpat {

using nlohmann::json;

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::Retranslate: return "retranslate";
    case AttackKind::Polish: return "polish";
    case AttackKind::SynonymSub: return "synonym-sub";
  }
  return "synonym-sub";
}

AttackKind attack_kind_from_string(const std::string& text) {
  if (text == "retranslate") return AttackKind::Retranslate;
  if (text == "polish") return AttackKind::Polish;
  if (text == "synonym-sub") return AttackKind::SynonymSub;
  throw ConfigError("unknown attack \"" + text + "\" (expected retranslate, polish or synonym-sub)");
}

std::string retranslate(const std::string& text, TranslationClient& client,
                        const std::string& pivot, const std::string& source) {
  return client.translate(client.translate(text, source, pivot), pivot, source);
}

SentenceSplit split_first_sentence(const std::string& text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || internal::is_space(text[i + 1]))) {
      return {text.substr(0, i + 1), text.substr(i + 1)};
    }
  }
  // No terminator: the first 20 words stand in for the sentence.
  std::size_t end = 0;
  std::size_t words = 0;
  std::size_t i = 0;
  while (i < text.size() && words < 20) {
    while (i < text.size() && internal::is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !internal::is_space(text[i])) ++i;
    if (i > start) {
      ++words;
      end = i;
    }
  }
  if (words < 20) return {text, ""};
  return {text.substr(0, end), text.substr(end)};
}

std::string polish_first_sentence(const std::string& text, Gateway& gateway,
                                  const PipelineConfig& config,
                                  const std::string& prompt_template) {
  if (text.empty()) throw DataError("cannot polish empty text");
  SentenceSplit parts = split_first_sentence(text);

  std::string prompt = prompt_template;
  auto pos = prompt.find("<SENTENCE>");
  if (pos == std::string::npos) throw ConfigError("polish prompt lacks the <SENTENCE> placeholder");
  prompt.replace(pos, 10, parts.first);

  auto request = single_turn_request(config.model_id, prompt, config.temperature, "polish");
  std::string polished = internal::trim(gateway.complete(request));
  if (polished.empty()) throw DataError("polish completion is empty");
  return polished + parts.rest;
}

SynonymLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  SynonymLexicon lexicon;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("lexicon line lacks a tab: " + line);
    std::string word = internal::to_lower_ascii(line.substr(0, tab));
    std::vector<std::string> synonyms;
    std::size_t start = tab + 1;
    while (start <= line.size()) {
      auto comma = line.find(',', start);
      std::string synonym = internal::trim(
          line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (!synonym.empty()) synonyms.push_back(synonym);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!synonyms.empty()) lexicon[word] = std::move(synonyms);
  }
  return lexicon;
}

std::string synonym_substitute(const std::string& text, const SynonymLexicon& lexicon, double prob,
                               std::uint64_t seed) {
  if (prob < 0.0 || prob > 1.0) throw ConfigError("substitution probability must be in [0, 1]");
  internal::DeterministicRng rng(seed);

  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (internal::is_space(text[i])) {
      out.push_back(text[i]);
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && !internal::is_space(text[i])) ++i;
    std::string token = text.substr(start, i - start);

    auto it = lexicon.find(internal::to_lower_ascii(token));
    if (it != lexicon.end() && !it->second.empty() && rng.next_double() < prob) {
      std::string replacement = it->second.front();
      if (!replacement.empty() && !token.empty()) {
        if (std::isupper(static_cast<unsigned char>(token.front()))) {
          replacement.front() =
              static_cast<char>(std::toupper(static_cast<unsigned char>(replacement.front())));
        } else {
          replacement.front() =
              static_cast<char>(std::tolower(static_cast<unsigned char>(replacement.front())));
        }
      }
      out += replacement;
    } else {
      out += token;
    }
  }
  return out;
}

namespace {

struct ClassTally {
  std::size_t machine_correct = 0, machine_total = 0;
  std::size_t human_correct = 0, human_total = 0;

  void add(Label truth, Label predicted) {
    if (truth == Label::Machine) {
      ++machine_total;
      if (predicted == Label::Machine) ++machine_correct;
    } else {
      ++human_total;
      if (predicted == Label::Human) ++human_correct;
    }
  }
  double combined() const {
    return static_cast<double>(machine_correct + human_correct) /
           static_cast<double>(machine_total + human_total);
  }
  double machine() const {
    return machine_total == 0 ? 0.0
                              : static_cast<double>(machine_correct) /
                                    static_cast<double>(machine_total);
  }
  double human() const {
    return human_total == 0 ? 0.0
                            : static_cast<double>(human_correct) / static_cast<double>(human_total);
  }
};

std::string perturb(const std::string& body, const std::string& id, const AttackSpec& spec,
                    const AttackResources& resources) {
  switch (spec.kind) {
    case AttackKind::Retranslate:
      if (!resources.translator) throw ConfigError("retranslation attack needs a translation client");
      return retranslate(body, *resources.translator, spec.pivot_language);
    case AttackKind::Polish:
      return polish_first_sentence(body, *resources.gateway, resources.pipeline,
                                   resources.polish_prompt);
    case AttackKind::SynonymSub: {
      if (!resources.lexicon) throw ConfigError("synonym substitution needs a lexicon");
      // Seed mixed with the sample id, so parallel or reordered runs agree.
      std::uint64_t per_text_seed = internal::fnv1a64(id) ^ spec.seed;
      return synonym_substitute(body, *resources.lexicon, spec.substitution_prob, per_text_seed);
    }
  }
  throw ConfigError("unhandled attack kind");
}

}  // namespace

AttackReport attack_eval(const DetectorModel& model, const std::vector<PairRecord>& pairs,
                         const AttackSpec& spec, const AttackResources& resources,
                         EmbeddingProvider& provider) {
  if (pairs.empty()) throw DataError("nothing to attack: empty pair set");
  if (!resources.gateway) throw ConfigError("attack_eval needs a gateway to re-run the pipeline");

  AttackReport report;
  report.attack = to_string(spec.kind);

  ClassTally before;
  for (const auto& pair : pairs) {
    if (!pair.original.label)
      throw DataError("pair \"" + pair.original.id + "\" is unlabeled; attack_eval needs labels");
    before.add(*pair.original.label, predict(model, pair, provider).label);
  }

  ClassTally after;
  for (const auto& pair : pairs) {
    try {
      TextSample attacked(pair.original.id,
                          perturb(pair.original.body, pair.original.id, spec, resources),
                          pair.original.label, pair.original.dataset_tag);
      PairRecord attacked_pair = create_pair(attacked, *resources.gateway, resources.pipeline);
      after.add(*pair.original.label, predict(model, attacked_pair, provider).label);
    } catch (const ConfigError&) {
      throw;  // misconfiguration is not a per-sample condition
    } catch (const std::exception&) {
      report.excluded.push_back(pair.original.id);
    }
  }
  if (after.machine_total + after.human_total == 0)
    throw DataError("every attacked sample failed the pipeline");

  report.before = before.combined();
  report.before_machine = before.machine();
  report.before_human = before.human();
  report.after = after.combined();
  report.after_machine = after.machine();
  report.after_human = after.human();
  report.drop_rate = report.before - report.after;
  return report;
}

json to_json(const AttackReport& report) {
  return json{{"attack", report.attack},
              {"before", report.before},
              {"after", report.after},
              {"drop_rate", report.drop_rate},
              {"before_machine", report.before_machine},
              {"before_human", report.before_human},
              {"after_machine", report.after_machine},
              {"after_human", report.after_human},
              {"excluded", report.excluded}};
}

void write_attack_report(const std::filesystem::path& path, const AttackReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
}

}  // namespace gptpat
