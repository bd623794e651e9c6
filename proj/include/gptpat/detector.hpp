#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gptpat/core.hpp"
#include "gptpat/similarity.hpp"

namespace gptpat {

// The four classifier structures: token-Jaccard + threshold, siamese cosine +
// threshold, siamese embeddings + fully connected head, and embeddings +
// cosine + fully connected head.
enum class ArchKind { TST, SST, SFC, SSF };

std::string to_string(ArchKind arch);
ArchKind arch_from_string(const std::string& text);

enum class SimMetric { Jaccard, Cosine };

// score >= threshold classifies as Machine; machine pairs score higher on
// both metrics, so positive_above is always true.
struct ThresholdModel {
  SimMetric metric = SimMetric::Cosine;
  double threshold = 0.0;
  bool positive_above = true;
};

struct ThresholdFit {
  ThresholdModel model;
  double train_accuracy = 0.0;
};

// Picks the threshold maximizing training accuracy over the midpoints of
// consecutive sorted distinct scores plus the two all-Machine / all-Human
// sentinels. Ties go to the candidate with the widest score gap (sentinels
// count as infinitely wide), then to the smallest threshold. Rejects
// single-class input.
ThresholdFit fit_threshold(const std::vector<double>& scores, const std::vector<Label>& labels,
                           SimMetric metric = SimMetric::Cosine);

// One hidden ReLU layer, logistic output.
struct MlpHead {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index hidden_dim() const { return w1.rows(); }
};

// logistic(w2 . relu(w1 x + b1) + b2)
double mlp_forward(const MlpHead& head, const Eigen::VectorXd& input);

// -(y log p + (1-y) log(1-p)) with p clamped to [eps, 1-eps], eps = 1e-12.
double bce_loss(double pre, int y);

struct MlpGradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
};

// Analytic gradients of bce_loss(mlp_forward(head, input), y) with respect to
// every parameter. pre_out, when given, receives the forward probability.
MlpGradients mlp_gradients(const MlpHead& head, const Eigen::VectorXd& input, int y,
                           double* pre_out = nullptr);

// The 5e-5 setting reported for joint encoder fine-tuning; the shipped
// head-only trainer defaults to 1e-3 and this stays recorded for anyone
// plugging in a trainable provider.
inline constexpr double kEncoderFinetuneLearningRate = 5e-5;

struct TrainConfig {
  int batch_size = 32;
  double learning_rate = 1e-3;
  int max_steps = 5000;
  std::uint64_t seed = 0;
  int validation_every = 100;
  int hidden_dim = 128;
  bool l2_normalize_embeddings = false;
  // Adam, standard defaults
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct TrainLogEntry {
  int step = 0;
  double loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  MlpHead head;  // checkpoint with the highest validation accuracy (earliest on ties)
  std::vector<TrainLogEntry> log;
  double best_val_accuracy = 0.0;
  int best_step = 0;
};

// Assembles the classifier input: SFC consumes (e_orig, e_reans), SSF
// additionally appends the cosine.
Eigen::VectorXd detector_input(ArchKind arch, const PairFeatures& features,
                               bool l2_normalize = false);

// Mini-batch Adam training of the head, deterministic for a fixed seed.
// Validates every validation_every steps and at the final step; aborts with
// TrainingError when the loss or a parameter goes non-finite.
TrainResult train_head(ArchKind arch, const std::vector<PairFeatures>& features,
                       const std::vector<Label>& labels, const TrainConfig& config,
                       const std::vector<PairFeatures>& val_features,
                       const std::vector<Label>& val_labels);

void write_training_log(const std::filesystem::path& path, const std::vector<TrainLogEntry>& log);

struct Verdict {
  double probability = 0.0;  // in [0, 1]
  Label label = Label::Human;
  ArchKind arch = ArchKind::TST;
  std::string model_version;
};

// A trained classifier of any architecture plus the provenance needed to
// apply it: threshold models carry ThresholdModel, MLP archs carry MlpHead.
struct DetectorModel {
  ArchKind arch = ArchKind::TST;
  std::string provider_id = "none";  // "none" for TST
  std::string model_version = "1";
  bool l2_normalize = false;
  std::optional<ThresholdModel> threshold;
  std::optional<MlpHead> head;
};

// Computes the arch's features for the pair and classifies. Boundary rule:
// score == threshold and probability == 0.5 both classify as Machine.
Verdict predict(const DetectorModel& model, const PairRecord& pair, EmbeddingProvider& provider);

// Classifies from precomputed pair features. Only the embedding-based archs
// can use this; TST works on the raw texts and goes through predict().
Verdict predict_with_features(const DetectorModel& model, const PairFeatures& features);

// Rejects providers other than the one the model was trained with.
void ensure_provider_compatible(const DetectorModel& model, const EmbeddingProvider& provider);

void save_model(const DetectorModel& model, const std::filesystem::path& path);
DetectorModel load_model(const std::filesystem::path& path);

}  // namespace gptpat
