#include "gptpat/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "internal/encoding.hpp"
#include "internal/rng.hpp"

namespace gptpat {

using nlohmann::json;

std::string to_string(ArchKind arch) {
  switch (arch) {
    case ArchKind::TST: return "TST";
    case ArchKind::SST: return "SST";
    case ArchKind::SFC: return "SFC";
    case ArchKind::SSF: return "SSF";
  }
  return "TST";
}

ArchKind arch_from_string(const std::string& text) {
  if (text == "TST") return ArchKind::TST;
  if (text == "SST") return ArchKind::SST;
  if (text == "SFC") return ArchKind::SFC;
  if (text == "SSF") return ArchKind::SSF;
  throw ConfigError("unknown architecture \"" + text + "\" (expected TST, SST, SFC or SSF)");
}

ThresholdFit fit_threshold(const std::vector<double>& scores, const std::vector<Label>& labels,
                           SimMetric metric) {
  if (scores.size() != labels.size())
    throw DataError("fit_threshold: scores and labels differ in length");
  if (scores.empty()) throw DataError("fit_threshold: empty input");

  // Per distinct score value: how many machine / human samples sit on it.
  std::map<double, std::pair<std::size_t, std::size_t>> by_value;  // value -> (machine, human)
  std::size_t n_machine = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto& counts = by_value[scores[i]];
    if (labels[i] == Label::Machine) {
      ++counts.first;
      ++n_machine;
    } else {
      ++counts.second;
    }
  }
  std::size_t n = scores.size();
  if (n_machine == 0 || n_machine == n)
    throw DataError("fit_threshold: need at least one score per class");

  const double inf = std::numeric_limits<double>::infinity();
  // Classification rule: score >= threshold => Machine. Candidates, in
  // ascending threshold order: the all-Machine sentinel (threshold at the
  // minimum score), the midpoint of every gap between consecutive distinct
  // scores, and the all-Human sentinel (just above the maximum score).
  double best_threshold = by_value.begin()->first;
  double best_gap = inf;
  std::size_t machine_ge = n_machine;  // machines at or above the current threshold
  std::size_t human_lt = 0;            // humans strictly below it
  std::size_t best_correct = machine_ge + human_lt;

  auto consider = [&](double threshold, double gap) {
    std::size_t correct = machine_ge + human_lt;
    if (correct > best_correct || (correct == best_correct && gap > best_gap)) {
      best_correct = correct;
      best_threshold = threshold;
      best_gap = gap;
    }
  };

  for (auto it = by_value.begin(); it != by_value.end(); ++it) {
    auto next = std::next(it);
    machine_ge -= it->second.first;
    human_lt += it->second.second;
    if (next != by_value.end()) {
      consider((it->first + next->first) / 2.0, next->first - it->first);
    } else {
      consider(std::nextafter(it->first, inf), inf);
    }
  }

  ThresholdFit fit;
  fit.model.metric = metric;
  fit.model.threshold = best_threshold;
  fit.model.positive_above = true;
  fit.train_accuracy = static_cast<double>(best_correct) / static_cast<double>(n);
  return fit;
}

namespace {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

void check_input(const MlpHead& head, const Eigen::VectorXd& input) {
  if (input.size() != head.input_dim())
    throw DataError("mlp input has dimension " + std::to_string(input.size()) + ", head expects " +
                    std::to_string(head.input_dim()));
}

void check_binary(int y) {
  if (y != 0 && y != 1) throw DataError("label must be 0 or 1, got " + std::to_string(y));
}

}  // namespace

double mlp_forward(const MlpHead& head, const Eigen::VectorXd& input) {
  check_input(head, input);
  Eigen::VectorXd hidden = (head.w1 * input + head.b1).cwiseMax(0.0);
  return logistic(head.w2.dot(hidden) + head.b2);
}

double bce_loss(double pre, int y) {
  check_binary(y);
  constexpr double eps = 1e-12;
  double p = std::clamp(pre, eps, 1.0 - eps);
  return y == 1 ? -std::log(p) : -std::log1p(-p);
}

MlpGradients mlp_gradients(const MlpHead& head, const Eigen::VectorXd& input, int y,
                           double* pre_out) {
  check_input(head, input);
  check_binary(y);

  Eigen::VectorXd z1 = head.w1 * input + head.b1;
  Eigen::VectorXd hidden = z1.cwiseMax(0.0);
  double pre = logistic(head.w2.dot(hidden) + head.b2);
  if (pre_out) *pre_out = pre;

  // d(bce o logistic)/dz2 collapses to pre - y.
  double dz2 = pre - static_cast<double>(y);

  MlpGradients grads;
  grads.w2 = dz2 * hidden;
  grads.b2 = dz2;
  Eigen::VectorXd dz1 =
      ((z1.array() > 0.0).cast<double>() * (dz2 * head.w2).array()).matrix();
  grads.w1 = dz1 * input.transpose();
  grads.b1 = dz1;
  return grads;
}

Eigen::VectorXd detector_input(ArchKind arch, const PairFeatures& features, bool l2_normalize) {
  if (arch != ArchKind::SFC && arch != ArchKind::SSF)
    throw ConfigError("detector_input is only defined for the fully connected archs");
  if (features.e_orig.dim() != features.e_reans.dim())
    throw DataError("pair features embeddings differ in dimension");

  Eigen::VectorXd a = features.e_orig.values();
  Eigen::VectorXd b = features.e_reans.values();
  if (l2_normalize) {
    a /= a.norm();
    b /= b.norm();
  }
  Eigen::Index d = a.size();
  Eigen::VectorXd input(arch == ArchKind::SSF ? 2 * d + 1 : 2 * d);
  input.head(d) = a;
  input.segment(d, d) = b;
  if (arch == ArchKind::SSF) input[2 * d] = features.cosine;
  return input;
}

namespace {

struct AdamState {
  Eigen::MatrixXd m_w1, v_w1;
  Eigen::VectorXd m_b1, v_b1, m_w2, v_w2;
  double m_b2 = 0.0, v_b2 = 0.0;
};

void adam_step(Eigen::Ref<Eigen::MatrixXd> param, Eigen::Ref<Eigen::MatrixXd> m,
               Eigen::Ref<Eigen::MatrixXd> v, const Eigen::MatrixXd& grad,
               const TrainConfig& config, double bias1, double bias2) {
  m = config.adam_beta1 * m + (1.0 - config.adam_beta1) * grad;
  v = (config.adam_beta2 * v.array() + (1.0 - config.adam_beta2) * grad.array().square()).matrix();
  param.array() -=
      config.learning_rate * (m.array() / bias1) / ((v.array() / bias2).sqrt() + config.adam_epsilon);
}

double validation_accuracy(const MlpHead& head, const std::vector<Eigen::VectorXd>& inputs,
                           const std::vector<int>& labels) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    bool machine = mlp_forward(head, inputs[i]) >= 0.5;
    if (machine == (labels[i] == 1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(inputs.size());
}

bool head_finite(const MlpHead& head) {
  return head.w1.allFinite() && head.b1.allFinite() && head.w2.allFinite() &&
         std::isfinite(head.b2);
}

}  // namespace

TrainResult train_head(ArchKind arch, const std::vector<PairFeatures>& features,
                       const std::vector<Label>& labels, const TrainConfig& config,
                       const std::vector<PairFeatures>& val_features,
                       const std::vector<Label>& val_labels) {
  if (arch != ArchKind::SFC && arch != ArchKind::SSF)
    throw ConfigError("train_head is only defined for SFC and SSF");
  if (features.empty()) throw DataError("train_head: empty training set");
  if (features.size() != labels.size())
    throw DataError("train_head: features and labels differ in length");
  if (val_features.empty() || val_features.size() != val_labels.size())
    throw DataError("train_head: validation split missing or inconsistent");
  if (config.batch_size < 1 || config.max_steps < 1 || config.validation_every < 1 ||
      config.hidden_dim < 1)
    throw ConfigError("train_head: batch_size, max_steps, validation_every and hidden_dim must be positive");

  bool has_machine = false, has_human = false;
  for (Label label : labels) (label == Label::Machine ? has_machine : has_human) = true;
  if (!has_machine || !has_human) throw DataError("train_head: both classes must be present");

  std::vector<Eigen::VectorXd> x_train, x_val;
  std::vector<int> y_train, y_val;
  x_train.reserve(features.size());
  for (const auto& f : features)
    x_train.push_back(detector_input(arch, f, config.l2_normalize_embeddings));
  for (Label label : labels) y_train.push_back(to_numeric(label));
  for (const auto& f : val_features)
    x_val.push_back(detector_input(arch, f, config.l2_normalize_embeddings));
  for (Label label : val_labels) y_val.push_back(to_numeric(label));

  const Eigen::Index input_dim = x_train.front().size();
  for (const auto& x : x_train)
    if (x.size() != input_dim) throw DataError("train_head: inconsistent feature dimensions");
  for (const auto& x : x_val)
    if (x.size() != input_dim) throw DataError("train_head: validation dimension mismatch");

  internal::DeterministicRng rng(config.seed);
  const Eigen::Index hidden = config.hidden_dim;

  MlpHead head;
  head.w1.resize(hidden, input_dim);
  double w1_scale = std::sqrt(2.0 / static_cast<double>(input_dim));
  for (Eigen::Index r = 0; r < hidden; ++r)
    for (Eigen::Index c = 0; c < input_dim; ++c) head.w1(r, c) = rng.next_normal() * w1_scale;
  head.b1 = Eigen::VectorXd::Zero(hidden);
  head.w2.resize(hidden);
  double w2_scale = std::sqrt(1.0 / static_cast<double>(hidden));
  for (Eigen::Index r = 0; r < hidden; ++r) head.w2[r] = rng.next_normal() * w2_scale;
  head.b2 = 0.0;

  AdamState adam;
  adam.m_w1 = Eigen::MatrixXd::Zero(hidden, input_dim);
  adam.v_w1 = adam.m_w1;
  adam.m_b1 = Eigen::VectorXd::Zero(hidden);
  adam.v_b1 = adam.m_b1;
  adam.m_w2 = adam.m_b1;
  adam.v_w2 = adam.m_b1;

  std::vector<std::size_t> order(x_train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();  // forces a shuffle before the first batch

  TrainResult result;
  result.best_val_accuracy = -1.0;
  const int batch = std::min<int>(config.batch_size, static_cast<int>(x_train.size()));

  for (int step = 1; step <= config.max_steps; ++step) {
    MlpGradients sum;
    sum.w1 = Eigen::MatrixXd::Zero(hidden, input_dim);
    sum.b1 = Eigen::VectorXd::Zero(hidden);
    sum.w2 = Eigen::VectorXd::Zero(hidden);
    sum.b2 = 0.0;
    double loss_sum = 0.0;

    for (int b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        rng.shuffle(order);
        cursor = 0;
      }
      std::size_t i = order[cursor++];
      double pre = 0.0;
      MlpGradients g = mlp_gradients(head, x_train[i], y_train[i], &pre);
      loss_sum += bce_loss(pre, y_train[i]);
      sum.w1 += g.w1;
      sum.b1 += g.b1;
      sum.w2 += g.w2;
      sum.b2 += g.b2;
    }

    double inv = 1.0 / static_cast<double>(batch);
    double loss = loss_sum * inv;
    if (!std::isfinite(loss))
      throw TrainingError("training diverged: non-finite loss at step " + std::to_string(step));
    sum.w1 *= inv;
    sum.b1 *= inv;
    sum.w2 *= inv;
    sum.b2 *= inv;

    double bias1 = 1.0 - std::pow(config.adam_beta1, step);
    double bias2 = 1.0 - std::pow(config.adam_beta2, step);
    adam_step(head.w1, adam.m_w1, adam.v_w1, sum.w1, config, bias1, bias2);
    adam_step(head.b1, adam.m_b1, adam.v_b1, sum.b1, config, bias1, bias2);
    adam_step(head.w2, adam.m_w2, adam.v_w2, sum.w2, config, bias1, bias2);
    adam.m_b2 = config.adam_beta1 * adam.m_b2 + (1.0 - config.adam_beta1) * sum.b2;
    adam.v_b2 = config.adam_beta2 * adam.v_b2 + (1.0 - config.adam_beta2) * sum.b2 * sum.b2;
    head.b2 -= config.learning_rate * (adam.m_b2 / bias1) /
               (std::sqrt(adam.v_b2 / bias2) + config.adam_epsilon);

    if (!head_finite(head))
      throw TrainingError("training diverged: non-finite parameters at step " +
                          std::to_string(step));

    if (step % config.validation_every == 0 || step == config.max_steps) {
      double val_acc = validation_accuracy(head, x_val, y_val);
      result.log.push_back({step, loss, val_acc});
      if (val_acc > result.best_val_accuracy) {
        result.best_val_accuracy = val_acc;
        result.best_step = step;
        result.head = head;
      }
    }
  }
  return result;
}

void write_training_log(const std::filesystem::path& path, const std::vector<TrainLogEntry>& log) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& entry : log) {
    out << json{{"step", entry.step}, {"loss", entry.loss}, {"val_accuracy", entry.val_accuracy}}
               .dump()
        << '\n';
  }
}

void ensure_provider_compatible(const DetectorModel& model, const EmbeddingProvider& provider) {
  if (model.provider_id != "none" && model.provider_id != provider.provider_id())
    throw ConfigError("model was trained with provider \"" + model.provider_id +
                      "\" but got \"" + provider.provider_id() + "\"");
}

namespace {

bool threshold_says_machine(const ThresholdModel& model, double score) {
  return model.positive_above ? score >= model.threshold : score <= model.threshold;
}

}  // namespace

Verdict predict_with_features(const DetectorModel& model, const PairFeatures& features) {
  Verdict verdict;
  verdict.arch = model.arch;
  verdict.model_version = model.model_version;

  switch (model.arch) {
    case ArchKind::TST:
      throw ConfigError("TST classifies raw texts, not embeddings");
    case ArchKind::SST: {
      if (!model.threshold) throw ConfigError("SST model has no fitted threshold");
      // Report the cosine mapped onto [0,1]; the decision uses the raw score.
      verdict.probability = (features.cosine + 1.0) / 2.0;
      verdict.label =
          threshold_says_machine(*model.threshold, features.cosine) ? Label::Machine : Label::Human;
      break;
    }
    case ArchKind::SFC:
    case ArchKind::SSF: {
      if (!model.head) throw ConfigError(to_string(model.arch) + " model has no trained head");
      Eigen::VectorXd input = detector_input(model.arch, features, model.l2_normalize);
      double pre = mlp_forward(*model.head, input);
      verdict.probability = pre;
      verdict.label = pre >= 0.5 ? Label::Machine : Label::Human;
      break;
    }
  }
  return verdict;
}

Verdict predict(const DetectorModel& model, const PairRecord& pair, EmbeddingProvider& provider) {
  if (model.arch == ArchKind::TST) {
    if (!model.threshold) throw ConfigError("TST model has no fitted threshold");
    Verdict verdict;
    verdict.arch = model.arch;
    verdict.model_version = model.model_version;
    double score = jaccard(pair.original.body, pair.re_answer);
    verdict.probability = score;
    verdict.label = threshold_says_machine(*model.threshold, score) ? Label::Machine : Label::Human;
    return verdict;
  }
  ensure_provider_compatible(model, provider);
  return predict_with_features(model, featurize(pair, provider));
}

namespace {

constexpr int kFormatVersion = 1;

std::string metric_name(SimMetric metric) {
  return metric == SimMetric::Jaccard ? "jaccard" : "cosine";
}

SimMetric metric_from_name(const std::string& name) {
  if (name == "jaccard") return SimMetric::Jaccard;
  if (name == "cosine") return SimMetric::Cosine;
  throw ModelIoError(ModelIoError::Kind::Corrupt, "unknown similarity metric \"" + name + "\"");
}

std::string matrix_to_base64(const Eigen::MatrixXd& m) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  return internal::doubles_to_base64(values.data(), values.size());
}

Eigen::MatrixXd matrix_from_base64(const std::string& text, Eigen::Index rows, Eigen::Index cols) {
  auto values = internal::base64_to_doubles(text);
  if (values.size() != static_cast<std::size_t>(rows * cols))
    throw ModelIoError(ModelIoError::Kind::Corrupt, "parameter array has wrong length");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[k++];
  return m;
}

}  // namespace

void save_model(const DetectorModel& model, const std::filesystem::path& path) {
  json dims = json::object();
  json params = json::object();
  json metadata = json::object();
  metadata["model_version"] = model.model_version;
  metadata["l2_normalize"] = model.l2_normalize;

  if (model.arch == ArchKind::TST || model.arch == ArchKind::SST) {
    if (!model.threshold) throw ConfigError("threshold arch without a fitted threshold");
    params["threshold"] = internal::doubles_to_base64(&model.threshold->threshold, 1);
    metadata["metric"] = metric_name(model.threshold->metric);
    metadata["positive_above"] = model.threshold->positive_above;
  } else {
    if (!model.head) throw ConfigError("fully connected arch without a trained head");
    const MlpHead& head = *model.head;
    dims["input_dim"] = head.input_dim();
    dims["hidden_dim"] = head.hidden_dim();
    Eigen::Index embed_dim =
        model.arch == ArchKind::SSF ? (head.input_dim() - 1) / 2 : head.input_dim() / 2;
    dims["embed_dim"] = embed_dim;
    params["w1"] = matrix_to_base64(head.w1);
    params["b1"] = internal::doubles_to_base64(head.b1.data(), static_cast<std::size_t>(head.b1.size()));
    params["w2"] = internal::doubles_to_base64(head.w2.data(), static_cast<std::size_t>(head.w2.size()));
    params["b2"] = internal::doubles_to_base64(&head.b2, 1);
  }

  json envelope{{"format_version", kFormatVersion},
                {"arch", to_string(model.arch)},
                {"provider_id", model.provider_id},
                {"dims", std::move(dims)},
                {"params", std::move(params)},
                {"metadata", std::move(metadata)}};

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    // No trailing newline: the closing brace is the final byte, so every
    // truncated prefix is detectably invalid.
    std::ofstream out(tmp);
    if (!out) throw ModelIoError(ModelIoError::Kind::Io, "cannot write " + path.string());
    out << envelope.dump(2);
  }
  std::filesystem::rename(tmp, path);
}

DetectorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelIoError(ModelIoError::Kind::Io, "cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  json envelope;
  try {
    envelope = json::parse(content);
  } catch (const json::exception& ex) {
    throw ModelIoError(ModelIoError::Kind::Corrupt,
                       path.string() + " is not a valid model file: " + ex.what());
  }

  try {
    if (!envelope.contains("format_version") || !envelope.at("format_version").is_number_integer())
      throw ModelIoError(ModelIoError::Kind::Corrupt, "missing format_version");
    int version = envelope.at("format_version").get<int>();
    if (version != kFormatVersion)
      throw ModelIoError(ModelIoError::Kind::VersionMismatch,
                         "model format version " + std::to_string(version) + ", expected " +
                             std::to_string(kFormatVersion));

    DetectorModel model;
    model.arch = arch_from_string(envelope.at("arch").get<std::string>());
    model.provider_id = envelope.value("provider_id", std::string("none"));
    const json& metadata = envelope.at("metadata");
    model.model_version = metadata.value("model_version", std::string("1"));
    model.l2_normalize = metadata.value("l2_normalize", false);
    const json& params = envelope.at("params");

    if (model.arch == ArchKind::TST || model.arch == ArchKind::SST) {
      if (!params.contains("threshold"))
        throw ModelIoError(ModelIoError::Kind::ArchMismatch,
                           to_string(model.arch) + " expects a threshold parameter");
      auto values = internal::base64_to_doubles(params.at("threshold").get<std::string>());
      if (values.size() != 1)
        throw ModelIoError(ModelIoError::Kind::Corrupt, "threshold array has wrong length");
      ThresholdModel threshold;
      threshold.threshold = values[0];
      threshold.metric = metric_from_name(metadata.value(
          "metric", model.arch == ArchKind::TST ? std::string("jaccard") : std::string("cosine")));
      SimMetric expected = model.arch == ArchKind::TST ? SimMetric::Jaccard : SimMetric::Cosine;
      if (threshold.metric != expected)
        throw ModelIoError(ModelIoError::Kind::ArchMismatch,
                           to_string(model.arch) + " model carries the wrong similarity metric");
      threshold.positive_above = metadata.value("positive_above", true);
      model.threshold = threshold;
    } else {
      for (const char* key : {"w1", "b1", "w2", "b2"}) {
        if (!params.contains(key))
          throw ModelIoError(ModelIoError::Kind::ArchMismatch,
                             to_string(model.arch) + " expects MLP parameters, \"" +
                                 std::string(key) + "\" is missing");
      }
      const json& dims = envelope.at("dims");
      Eigen::Index input_dim = dims.at("input_dim").get<Eigen::Index>();
      Eigen::Index hidden_dim = dims.at("hidden_dim").get<Eigen::Index>();
      Eigen::Index embed_dim = dims.at("embed_dim").get<Eigen::Index>();
      if (input_dim <= 0 || hidden_dim <= 0 || embed_dim <= 0)
        throw ModelIoError(ModelIoError::Kind::Corrupt, "non-positive model dimensions");
      Eigen::Index expected_input =
          model.arch == ArchKind::SSF ? 2 * embed_dim + 1 : 2 * embed_dim;
      if (input_dim != expected_input)
        throw ModelIoError(ModelIoError::Kind::Corrupt,
                           "input_dim inconsistent with embed_dim for " + to_string(model.arch));

      MlpHead head;
      head.w1 = matrix_from_base64(params.at("w1").get<std::string>(), hidden_dim, input_dim);
      auto b1 = internal::base64_to_doubles(params.at("b1").get<std::string>());
      auto w2 = internal::base64_to_doubles(params.at("w2").get<std::string>());
      auto b2 = internal::base64_to_doubles(params.at("b2").get<std::string>());
      if (b1.size() != static_cast<std::size_t>(hidden_dim) ||
          w2.size() != static_cast<std::size_t>(hidden_dim) || b2.size() != 1)
        throw ModelIoError(ModelIoError::Kind::Corrupt, "parameter array has wrong length");
      head.b1 = Eigen::Map<Eigen::VectorXd>(b1.data(), hidden_dim);
      head.w2 = Eigen::Map<Eigen::VectorXd>(w2.data(), hidden_dim);
      head.b2 = b2[0];
      model.head = std::move(head);
    }
    return model;
  } catch (const ModelIoError&) {
    throw;
  } catch (const ConfigError& ex) {
    throw ModelIoError(ModelIoError::Kind::Corrupt, ex.what());
  } catch (const json::exception& ex) {
    throw ModelIoError(ModelIoError::Kind::Corrupt,
                       path.string() + " is not a valid model file: " + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw ModelIoError(ModelIoError::Kind::Corrupt,
                       path.string() + ": bad parameter encoding: " + ex.what());
  }
}

}  // namespace gptpat
