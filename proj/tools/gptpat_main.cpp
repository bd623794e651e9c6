// gptpat: machine-generated-text detection by question generation and
// re-answering. Subcommands cover the full workflow: create-pairs, train,
// evaluate, detect, attack, clean, split.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gptpat/adversary.hpp"
#include "gptpat/backends.hpp"
#include "gptpat/core.hpp"
#include "gptpat/detector.hpp"
#include "gptpat/evalbench.hpp"
#include "gptpat/gateway.hpp"
#include "gptpat/pipeline.hpp"
#include "gptpat/similarity.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 success, 1 usage/config, 2 data error, 3 backend error.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;
constexpr int kExitInterrupted = 130;

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

struct GlobalOptions {
  // chat backend
  std::string endpoint = "https://api.openai.com";
  std::string model_id = "gpt-3.5-turbo";
  std::string api_key_env = "OPENAI_API_KEY";
  bool mock_backend = false;
  std::string mock_script;
  std::string cache_dir;
  std::string audit_log;
  double temperature = gptpat::kDefaultTemperature;
  int parallelism = 1;
  std::uint64_t seed = 0;
  std::string len_unit = "words";
  // embedding provider
  std::string provider = "bow";
  int provider_dim = 256;
  std::string provider_vocab;
  std::string embed_endpoint;
  std::string embed_model;
  std::string embed_key_env = "OPENAI_API_KEY";
};

std::shared_ptr<gptpat::ChatBackend> make_backend(const GlobalOptions& options) {
  if (options.mock_backend) {
    if (!options.mock_script.empty())
      return gptpat::ScriptedChatBackend::from_jsonl(options.mock_script);
    return std::make_shared<gptpat::EchoChatBackend>();
  }
  gptpat::HttpChatBackend::Options backend_options;
  backend_options.base_url = options.endpoint;
  backend_options.api_key_env = options.api_key_env;
  return std::make_shared<gptpat::HttpChatBackend>(backend_options);
}

std::unique_ptr<gptpat::Gateway> make_gateway(const GlobalOptions& options) {
  std::shared_ptr<gptpat::ResponseCache> cache;
  if (!options.cache_dir.empty()) cache = std::make_shared<gptpat::ResponseCache>(options.cache_dir);
  gptpat::GatewayOptions gateway_options;
  gateway_options.audit_log = options.audit_log;
  if (options.mock_backend) gateway_options.initial_backoff = std::chrono::milliseconds(10);
  return std::make_unique<gptpat::Gateway>(make_backend(options), cache, gateway_options);
}

std::unique_ptr<gptpat::EmbeddingProvider> make_provider(const GlobalOptions& options) {
  if (options.provider == "bow")
    return std::make_unique<gptpat::BagOfWordsProvider>(
        static_cast<Eigen::Index>(options.provider_dim));
  if (options.provider == "bow-vocab") {
    if (options.provider_vocab.empty())
      throw gptpat::ConfigError("--provider bow-vocab needs --provider-vocab FILE");
    std::ifstream in(options.provider_vocab);
    if (!in) throw gptpat::ConfigError("cannot open vocabulary " + options.provider_vocab);
    std::vector<std::string> vocabulary;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) vocabulary.push_back(line);
    }
    return std::make_unique<gptpat::BagOfWordsProvider>(std::move(vocabulary));
  }
  if (options.provider == "remote") {
    if (options.embed_endpoint.empty() || options.embed_model.empty())
      throw gptpat::ConfigError("--provider remote needs --embed-endpoint and --embed-model");
    std::string api_key;
    if (const char* key = std::getenv(options.embed_key_env.c_str())) api_key = key;
    return std::make_unique<gptpat::RemoteEmbeddingProvider>(
        options.embed_endpoint, options.embed_model, static_cast<Eigen::Index>(options.provider_dim),
        api_key);
  }
  throw gptpat::ConfigError("unknown provider \"" + options.provider +
                            "\" (expected bow, bow-vocab or remote)");
}

gptpat::PipelineConfig make_pipeline_config(const GlobalOptions& options) {
  gptpat::PipelineConfig config;
  config.model_id = options.model_id;
  config.temperature = options.temperature;
  config.parallelism = options.parallelism;
  if (options.len_unit == "words") {
    config.len_unit = gptpat::PipelineConfig::LenUnit::Words;
  } else if (options.len_unit == "bytes") {
    config.len_unit = gptpat::PipelineConfig::LenUnit::Bytes;
  } else {
    throw gptpat::ConfigError("--len-unit must be words or bytes");
  }
  return config;
}

// Round-trips texts unchanged; stands in for a real translation service in
// offline runs.
class IdentityTranslationClient : public gptpat::TranslationClient {
 public:
  std::string translate(const std::string& text, const std::string&, const std::string&) override {
    return text;
  }
};

struct CreatePairsArgs {
  std::string samples_path;
  std::string out_path;
  std::string failures_path;
  bool resume = false;
  std::string clean_phrases;
};

int cmd_create_pairs(const GlobalOptions& options, const CreatePairsArgs& args) {
  auto samples = gptpat::read_samples_jsonl(args.samples_path);

  if (!args.clean_phrases.empty()) {
    auto phrases = gptpat::load_indicator_phrases(args.clean_phrases);
    for (auto& sample : samples) {
      sample = gptpat::TextSample(sample.id, gptpat::clean(sample.body, phrases), sample.label,
                                  sample.dataset_tag);
    }
  }

  auto gateway = make_gateway(options);
  auto config = make_pipeline_config(options);
  config.resume = args.resume;
  gptpat::JsonlPairSink sink(args.out_path, args.resume);

  std::signal(SIGINT, handle_sigint);
  auto summary = gptpat::batch_create(samples, *gateway, config, sink,
                                      [] { return g_interrupted.load(); });

  std::string failures_path =
      args.failures_path.empty() ? args.out_path + ".failures.jsonl" : args.failures_path;
  gptpat::write_failures_jsonl(failures_path, summary.failures);

  std::cout << json{{"succeeded", summary.succeeded},
                    {"failed", summary.failed},
                    {"skipped", summary.skipped},
                    {"backend_calls", gateway->backend_calls()},
                    {"cache_hits", gateway->cache_hits()}}
                   .dump()
            << '\n';
  if (g_interrupted.load()) return kExitInterrupted;
  return summary.failed == 0 ? kExitOk : kExitBackend;
}

struct TrainArgs {
  std::string pairs_path;
  std::string val_path;
  std::string arch = "SSF";
  std::string model_out;
  std::string log_out;
  std::string model_version = "1";
  gptpat::TrainConfig config;
};

void require_labels(const std::vector<gptpat::PairRecord>& pairs, const std::string& path) {
  for (const auto& pair : pairs) {
    if (!pair.original.label)
      throw gptpat::DataError(path + ": pair \"" + pair.original.id + "\" has no label");
  }
}

int cmd_train(const GlobalOptions& options, TrainArgs& args) {
  auto arch = gptpat::arch_from_string(args.arch);
  auto pairs = gptpat::read_pairs_jsonl(args.pairs_path);
  if (pairs.empty()) throw gptpat::DataError(args.pairs_path + " holds no pairs");
  require_labels(pairs, args.pairs_path);

  std::vector<gptpat::Label> labels;
  for (const auto& pair : pairs) labels.push_back(*pair.original.label);

  gptpat::DetectorModel model;
  model.arch = arch;
  model.model_version = args.model_version;
  json summary{{"arch", args.arch}, {"model_path", args.model_out}};

  if (arch == gptpat::ArchKind::TST) {
    std::vector<double> scores;
    for (const auto& pair : pairs)
      scores.push_back(gptpat::jaccard(pair.original.body, pair.re_answer));
    auto fit = gptpat::fit_threshold(scores, labels, gptpat::SimMetric::Jaccard);
    model.threshold = fit.model;
    model.provider_id = "none";
    summary["train_accuracy"] = fit.train_accuracy;
    summary["threshold"] = fit.model.threshold;
  } else {
    auto provider = make_provider(options);
    model.provider_id = provider->provider_id();
    std::vector<gptpat::PairFeatures> features;
    features.reserve(pairs.size());
    for (const auto& pair : pairs) features.push_back(gptpat::featurize(pair, *provider));

    if (arch == gptpat::ArchKind::SST) {
      std::vector<double> scores;
      for (const auto& f : features) scores.push_back(f.cosine);
      auto fit = gptpat::fit_threshold(scores, labels, gptpat::SimMetric::Cosine);
      model.threshold = fit.model;
      summary["train_accuracy"] = fit.train_accuracy;
      summary["threshold"] = fit.model.threshold;
    } else {
      if (args.val_path.empty())
        throw gptpat::ConfigError(args.arch + " training needs --val VALIDATION_PAIRS");
      auto val_pairs = gptpat::read_pairs_jsonl(args.val_path);
      if (val_pairs.empty()) throw gptpat::DataError(args.val_path + " holds no pairs");
      require_labels(val_pairs, args.val_path);
      std::vector<gptpat::PairFeatures> val_features;
      std::vector<gptpat::Label> val_labels;
      for (const auto& pair : val_pairs) {
        val_features.push_back(gptpat::featurize(pair, *provider));
        val_labels.push_back(*pair.original.label);
      }

      args.config.seed = options.seed;
      auto result =
          gptpat::train_head(arch, features, labels, args.config, val_features, val_labels);
      model.head = result.head;
      model.l2_normalize = args.config.l2_normalize_embeddings;
      if (!args.log_out.empty()) gptpat::write_training_log(args.log_out, result.log);
      summary["best_val_accuracy"] = result.best_val_accuracy;
      summary["best_step"] = result.best_step;
    }
  }

  gptpat::save_model(model, args.model_out);
  std::cout << summary.dump() << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::string model_path;
  std::string pairs_path;
  std::string report_out;
  std::string histogram_out;
  bool skip_failures = false;
};

int cmd_evaluate(const GlobalOptions& options, const EvaluateArgs& args) {
  auto model = gptpat::load_model(args.model_path);
  auto pairs = gptpat::read_pairs_jsonl(args.pairs_path);
  auto provider = make_provider(options);

  gptpat::EvalOptions eval_options;
  eval_options.skip_failures = args.skip_failures;
  auto report = gptpat::evaluate(model, pairs, *provider, eval_options);

  if (!args.report_out.empty()) gptpat::write_report_json(args.report_out, report);
  if (report.similarity_histogram) {
    std::string histogram_path = args.histogram_out.empty()
                                     ? (args.report_out.empty() ? std::string()
                                                                : args.report_out + ".histogram.csv")
                                     : args.histogram_out;
    if (!histogram_path.empty())
      gptpat::write_histogram_csv(histogram_path, *report.similarity_histogram);
  }
  std::cout << gptpat::to_json(report).dump() << '\n';
  return kExitOk;
}

struct DetectArgs {
  std::string text;
  std::string file;
  std::string model_path;
};

int cmd_detect(const GlobalOptions& options, const DetectArgs& args) {
  std::string body;
  if (!args.text.empty() && !args.file.empty())
    throw gptpat::ConfigError("give either TEXT or --file, not both");
  if (!args.text.empty()) {
    body = args.text;
  } else if (args.file == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    body = buffer.str();
  } else if (!args.file.empty()) {
    std::ifstream in(args.file);
    if (!in) throw gptpat::DataError("cannot open " + args.file);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    body = buffer.str();
  } else {
    throw gptpat::ConfigError("nothing to detect: give TEXT or --file PATH (- for stdin)");
  }
  if (body.empty()) throw gptpat::DataError("empty input text");

  auto model = gptpat::load_model(args.model_path);
  auto gateway = make_gateway(options);
  auto provider = make_provider(options);
  auto config = make_pipeline_config(options);

  gptpat::TextSample sample("detect", body);
  auto pair = gptpat::create_pair(sample, *gateway, config);
  auto verdict = gptpat::predict(model, pair, *provider);

  std::cout << json{{"probability", verdict.probability},
                    {"label", gptpat::to_string(verdict.label)},
                    {"arch", gptpat::to_string(verdict.arch)},
                    {"model_version", verdict.model_version},
                    {"generated_question", pair.generated_question},
                    {"re_answer", pair.re_answer}}
                   .dump()
            << '\n';
  return kExitOk;
}

struct AttackArgs {
  std::string model_path;
  std::string pairs_path;
  std::string attack = "synonym-sub";
  std::string pivot = "zh";
  double prob = 0.5;
  std::string lexicon_path;
  std::string report_out;
};

int cmd_attack(const GlobalOptions& options, const AttackArgs& args) {
  auto model = gptpat::load_model(args.model_path);
  auto pairs = gptpat::read_pairs_jsonl(args.pairs_path);
  auto provider = make_provider(options);
  auto gateway = make_gateway(options);

  gptpat::AttackSpec spec;
  spec.kind = gptpat::attack_kind_from_string(args.attack);
  spec.pivot_language = args.pivot;
  spec.substitution_prob = args.prob;
  spec.seed = options.seed;

  gptpat::AttackResources resources;
  resources.gateway = gateway.get();
  resources.pipeline = make_pipeline_config(options);

  IdentityTranslationClient identity_translator;
  if (spec.kind == gptpat::AttackKind::Retranslate) {
    if (!options.mock_backend)
      throw gptpat::ConfigError(
          "no translation service is bundled; retranslation runs offline with --mock-backend "
          "(identity translation) or through a custom TranslationClient");
    resources.translator = &identity_translator;
  }

  gptpat::SynonymLexicon lexicon;
  if (spec.kind == gptpat::AttackKind::SynonymSub) {
    if (args.lexicon_path.empty())
      throw gptpat::ConfigError("synonym substitution needs --lexicon FILE");
    lexicon = gptpat::load_lexicon(args.lexicon_path);
    resources.lexicon = &lexicon;
  }

  auto report = gptpat::attack_eval(model, pairs, spec, resources, *provider);
  if (!args.report_out.empty()) gptpat::write_attack_report(args.report_out, report);
  std::cout << gptpat::to_json(report).dump() << '\n';
  return kExitOk;
}

struct CleanArgs {
  std::string samples_path;
  std::string out_path;
  std::string phrases_path;
};

int cmd_clean(const CleanArgs& args) {
  auto samples = gptpat::read_samples_jsonl(args.samples_path);
  auto phrases = gptpat::load_indicator_phrases(args.phrases_path);
  for (auto& sample : samples) {
    sample = gptpat::TextSample(sample.id, gptpat::clean(sample.body, phrases), sample.label,
                                sample.dataset_tag);
  }
  gptpat::write_samples_jsonl(args.out_path, samples);
  std::cout << json{{"cleaned", samples.size()}}.dump() << '\n';
  return kExitOk;
}

struct SplitArgs {
  std::string input_path;
  std::string out_prefix;
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
  bool no_stratify = false;
};

int cmd_split(const GlobalOptions& options, const SplitArgs& args) {
  std::ifstream probe(args.input_path);
  if (!probe) throw gptpat::DataError("cannot open " + args.input_path);
  std::string first_line;
  while (std::getline(probe, first_line)) {
    if (!first_line.empty()) break;
  }
  if (first_line.empty()) throw gptpat::DataError(args.input_path + " is empty");
  bool is_pairs = false;
  try {
    is_pairs = json::parse(first_line).contains("original");
  } catch (const json::exception& ex) {
    throw gptpat::DataError(args.input_path + ": line 1: " + ex.what());
  }

  gptpat::SplitSpec spec;
  spec.train_ratio = args.train;
  spec.val_ratio = args.val;
  spec.test_ratio = args.test;
  spec.seed = options.seed;
  spec.stratify_by_label = !args.no_stratify;

  json sizes;
  if (is_pairs) {
    auto pairs = gptpat::read_pairs_jsonl(args.input_path);
    std::vector<std::optional<gptpat::Label>> labels;
    for (const auto& pair : pairs) labels.push_back(pair.original.label);
    auto indices = gptpat::split_indices(pairs.size(), labels, spec);
    auto write = [&](const std::vector<std::size_t>& index_list, const std::string& suffix) {
      std::vector<gptpat::PairRecord> subset;
      for (std::size_t i : index_list) subset.push_back(pairs[i]);
      gptpat::write_pairs_jsonl(args.out_prefix + suffix, subset);
      return subset.size();
    };
    sizes = json{{"train", write(indices.train, ".train.jsonl")},
                 {"val", write(indices.val, ".val.jsonl")},
                 {"test", write(indices.test, ".test.jsonl")}};
  } else {
    auto samples = gptpat::read_samples_jsonl(args.input_path);
    auto result = gptpat::split(samples, spec);
    gptpat::write_samples_jsonl(args.out_prefix + ".train.jsonl", result.train);
    gptpat::write_samples_jsonl(args.out_prefix + ".val.jsonl", result.val);
    gptpat::write_samples_jsonl(args.out_prefix + ".test.jsonl", result.test);
    sizes = json{{"train", result.train.size()},
                 {"val", result.val.size()},
                 {"test", result.test.size()}};
  }
  std::cout << sizes.dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GPT-Pat: detect machine-generated text by re-answering"};
  app.require_subcommand(1);
  // Global options may follow the subcommand name.
  app.fallthrough();
  app.set_config("--config", "", "TOML-style key/value config file");

  GlobalOptions options;
  app.add_option("--endpoint", options.endpoint, "Chat-completion endpoint base URL")
      ->envname("GPTPAT_ENDPOINT");
  app.add_option("--model", options.model_id, "Chat model id")->envname("GPTPAT_MODEL");
  app.add_option("--api-key-env", options.api_key_env,
                 "Name of the environment variable holding the API key");
  app.add_flag("--mock-backend", options.mock_backend,
               "Swap all network clients for deterministic mocks");
  app.add_option("--mock-script", options.mock_script,
                 "JSON-Lines of {\"prompt\",\"response\"} for the scripted mock backend");
  app.add_option("--cache-dir", options.cache_dir, "Response cache directory")
      ->envname("GPTPAT_CACHE_DIR");
  app.add_option("--audit-log", options.audit_log, "Append request/response JSON-Lines here");
  app.add_option("--temperature", options.temperature, "Sampling temperature for every call");
  app.add_option("--parallelism", options.parallelism, "Concurrent in-flight requests")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", options.seed, "Seed for splits, training and attacks");
  app.add_option("--len-unit", options.len_unit, "Re-answer length unit: words or bytes");
  app.add_option("--provider", options.provider, "Embedding provider: bow, bow-vocab or remote");
  app.add_option("--provider-dim", options.provider_dim, "Embedding dimension (bow, remote)")
      ->check(CLI::PositiveNumber);
  app.add_option("--provider-vocab", options.provider_vocab,
                 "Vocabulary file for bow-vocab (one word per line)");
  app.add_option("--embed-endpoint", options.embed_endpoint, "Embedding endpoint base URL");
  app.add_option("--embed-model", options.embed_model, "Embedding model id");
  app.add_option("--embed-key-env", options.embed_key_env,
                 "Environment variable holding the embedding API key");

  auto* create = app.add_subcommand("create-pairs", "Generate question/re-answer pairs in bulk");
  CreatePairsArgs create_args;
  create->add_option("--samples", create_args.samples_path, "Input samples JSON-Lines")->required();
  create->add_option("--out", create_args.out_path, "Output pairs JSON-Lines")->required();
  create->add_option("--failures", create_args.failures_path,
                     "Failure list path (default: OUT.failures.jsonl)");
  create->add_flag("--resume", create_args.resume, "Skip ids already present in the output");
  create->add_option("--clean-phrases", create_args.clean_phrases,
                     "Indicator-phrase file; clean bodies before the pipeline");

  auto* train = app.add_subcommand("train", "Fit a detector on labeled pairs");
  TrainArgs train_args;
  train->add_option("--pairs", train_args.pairs_path, "Training pairs JSON-Lines")->required();
  train->add_option("--val", train_args.val_path, "Validation pairs (required for SFC/SSF)");
  train->add_option("--arch", train_args.arch, "TST, SST, SFC or SSF")->required();
  train->add_option("--model-out", train_args.model_out, "Model file path")->required();
  train->add_option("--log-out", train_args.log_out, "Training log JSON-Lines path");
  train->add_option("--model-version", train_args.model_version, "Version string stored in the model");
  train->add_option("--batch-size", train_args.config.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--learning-rate", train_args.config.learning_rate);
  train->add_option("--max-steps", train_args.config.max_steps)->check(CLI::PositiveNumber);
  train->add_option("--validation-every", train_args.config.validation_every)
      ->check(CLI::PositiveNumber);
  train->add_option("--hidden-dim", train_args.config.hidden_dim)->check(CLI::PositiveNumber);
  train->add_flag("--l2-normalize", train_args.config.l2_normalize_embeddings,
                  "L2-normalize embeddings before the head");

  auto* evaluate = app.add_subcommand("evaluate", "Score a model on labeled pairs");
  EvaluateArgs eval_args;
  evaluate->add_option("--model", eval_args.model_path, "Model file")->required();
  evaluate->add_option("--pairs", eval_args.pairs_path, "Labeled pairs JSON-Lines")->required();
  evaluate->add_option("--report-out", eval_args.report_out, "Report JSON path");
  evaluate->add_option("--histogram-out", eval_args.histogram_out, "Histogram CSV path");
  evaluate->add_flag("--skip-failures", eval_args.skip_failures,
                     "Exclude pairs whose prediction fails instead of aborting");

  auto* detect = app.add_subcommand("detect", "Classify a single text");
  DetectArgs detect_args;
  detect->add_option("text", detect_args.text, "Text to classify");
  detect->add_option("--file", detect_args.file, "Read the text from a file, - for stdin");
  detect->add_option("--model", detect_args.model_path, "Model file")->required();

  auto* attack = app.add_subcommand("attack", "Perturb texts and re-run detection");
  AttackArgs attack_args;
  attack->add_option("--model", attack_args.model_path, "Model file")->required();
  attack->add_option("--pairs", attack_args.pairs_path, "Labeled pairs JSON-Lines")->required();
  attack->add_option("--attack", attack_args.attack, "retranslate, polish or synonym-sub")
      ->required();
  attack->add_option("--pivot", attack_args.pivot, "Pivot language for retranslation");
  attack->add_option("--prob", attack_args.prob, "Substitution probability")
      ->check(CLI::Range(0.0, 1.0));
  attack->add_option("--lexicon", attack_args.lexicon_path, "Synonym lexicon (word TAB synonyms)");
  attack->add_option("--report-out", attack_args.report_out, "Attack report JSON path");

  auto* clean_cmd = app.add_subcommand("clean", "Remove indicator phrases from sample bodies");
  CleanArgs clean_args;
  clean_cmd->add_option("--samples", clean_args.samples_path, "Input samples JSON-Lines")->required();
  clean_cmd->add_option("--out", clean_args.out_path, "Output samples JSON-Lines")->required();
  clean_cmd->add_option("--phrases", clean_args.phrases_path, "Indicator-phrase file")->required();

  auto* split_cmd = app.add_subcommand("split", "Deterministic stratified train/val/test split");
  SplitArgs split_args;
  split_cmd->add_option("--input", split_args.input_path, "Samples or pairs JSON-Lines")->required();
  split_cmd->add_option("--out-prefix", split_args.out_prefix, "Prefix for the three output files")
      ->required();
  split_cmd->add_option("--train", split_args.train, "Train ratio");
  split_cmd->add_option("--val", split_args.val, "Validation ratio");
  split_cmd->add_option("--test", split_args.test, "Test ratio");
  split_cmd->add_flag("--no-stratify", split_args.no_stratify, "Split without label stratification");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int code = app.exit(ex);
    return code == 0 ? kExitOk : kExitUsage;  // help/version exit 0
  }

  try {
    if (create->parsed()) return cmd_create_pairs(options, create_args);
    if (train->parsed()) return cmd_train(options, train_args);
    if (evaluate->parsed()) return cmd_evaluate(options, eval_args);
    if (detect->parsed()) return cmd_detect(options, detect_args);
    if (attack->parsed()) return cmd_attack(options, attack_args);
    if (clean_cmd->parsed()) return cmd_clean(clean_args);
    if (split_cmd->parsed()) return cmd_split(options, split_args);
    std::cerr << "no subcommand given\n";
    return kExitUsage;
  } catch (const gptpat::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const gptpat::BackendError& ex) {
    std::cerr << "backend error: " << ex.what() << '\n';
    return kExitBackend;
  } catch (const gptpat::ProviderError& ex) {
    std::cerr << "provider error: " << ex.what() << '\n';
    return kExitBackend;
  } catch (const gptpat::ModelIoError& ex) {
    std::cerr << "model error: " << ex.what() << '\n';
    return kExitData;
  } catch (const gptpat::DataError& ex) {
    std::cerr << "data error: " << ex.what() << '\n';
    return kExitData;
  } catch (const gptpat::TrainingError& ex) {
    std::cerr << "training error: " << ex.what() << '\n';
    return kExitData;
  } catch (const gptpat::Error& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& ex) {
    std::cerr << "unexpected error: " << ex.what() << '\n';
    return kExitUsage;
  }
}
