// Brute-force reference implementations the tests check the library against.
// Everything here is deliberately written from scratch, sharing no code with
// the implementations under test.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gptpat/core.hpp"
#include "gptpat/detector.hpp"

namespace oracle {

inline std::set<std::string> token_set(const std::string& text) {
  std::istringstream stream(text);
  std::set<std::string> tokens;
  std::string token;
  while (stream >> token) {
    std::string lowered;
    for (char c : token) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    tokens.insert(lowered);
  }
  return tokens;
}

inline double jaccard(const std::string& a, const std::string& b) {
  auto sa = token_set(a);
  auto sb = token_set(b);
  if (sa.empty() && sb.empty()) return 1.0;
  std::vector<std::string> intersection;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                        std::back_inserter(intersection));
  std::vector<std::string> unified;
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(unified));
  return static_cast<double>(intersection.size()) / static_cast<double>(unified.size());
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double value = dot / (std::sqrt(na) * std::sqrt(nb));
  if (value > 1.0) return 1.0;
  if (value < -1.0) return -1.0;
  return value;
}

// Bag-of-words cosine of two texts over lowercased whitespace tokens,
// computed with count maps rather than vectors.
inline double bow_cosine(const std::string& a, const std::string& b) {
  auto count = [](const std::string& text) {
    std::istringstream stream(text);
    std::map<std::string, int> counts;
    std::string token;
    while (stream >> token) {
      std::string lowered;
      for (char c : token)
        lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      counts[lowered] += 1;
    }
    return counts;
  };
  auto ca = count(a);
  auto cb = count(b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [token, n] : ca) {
    na += static_cast<double>(n) * n;
    auto it = cb.find(token);
    if (it != cb.end()) dot += static_cast<double>(n) * it->second;
  }
  for (const auto& [token, n] : cb) nb += static_cast<double>(n) * n;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Best achievable training accuracy for the rule "score >= t => Machine",
// via an exhaustive sweep over every behaviorally distinct threshold.
inline double best_threshold_accuracy(const std::vector<double>& scores,
                                      const std::vector<gptpat::Label>& labels) {
  std::vector<double> candidates;
  for (double s : scores) {
    candidates.push_back(s);
    candidates.push_back(std::nextafter(s, std::numeric_limits<double>::infinity()));
  }
  double best = 0.0;
  for (double t : candidates) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      bool machine = scores[i] >= t;
      if (machine == (labels[i] == gptpat::Label::Machine)) ++correct;
    }
    best = std::max(best, static_cast<double>(correct) / static_cast<double>(scores.size()));
  }
  return best;
}

// Central finite differences of bce_loss(mlp_forward(...)) with respect to
// every parameter of the head.
inline gptpat::MlpGradients finite_difference_gradients(const gptpat::MlpHead& head,
                                                        const Eigen::VectorXd& input, int y,
                                                        double h = 1e-5) {
  auto loss_with = [&](const gptpat::MlpHead& candidate) {
    return gptpat::bce_loss(gptpat::mlp_forward(candidate, input), y);
  };

  gptpat::MlpGradients grads;
  grads.w1 = Eigen::MatrixXd::Zero(head.hidden_dim(), head.input_dim());
  grads.b1 = Eigen::VectorXd::Zero(head.hidden_dim());
  grads.w2 = Eigen::VectorXd::Zero(head.hidden_dim());

  for (Eigen::Index r = 0; r < head.hidden_dim(); ++r) {
    for (Eigen::Index c = 0; c < head.input_dim(); ++c) {
      gptpat::MlpHead plus = head, minus = head;
      plus.w1(r, c) += h;
      minus.w1(r, c) -= h;
      grads.w1(r, c) = (loss_with(plus) - loss_with(minus)) / (2 * h);
    }
  }
  for (Eigen::Index r = 0; r < head.hidden_dim(); ++r) {
    gptpat::MlpHead plus = head, minus = head;
    plus.b1[r] += h;
    minus.b1[r] -= h;
    grads.b1[r] = (loss_with(plus) - loss_with(minus)) / (2 * h);
  }
  for (Eigen::Index r = 0; r < head.hidden_dim(); ++r) {
    gptpat::MlpHead plus = head, minus = head;
    plus.w2[r] += h;
    minus.w2[r] -= h;
    grads.w2[r] = (loss_with(plus) - loss_with(minus)) / (2 * h);
  }
  {
    gptpat::MlpHead plus = head, minus = head;
    plus.b2 += h;
    minus.b2 -= h;
    grads.b2 = (loss_with(plus) - loss_with(minus)) / (2 * h);
  }
  return grads;
}

// Largest relative error between analytic and reference gradients.
inline double max_relative_error(const gptpat::MlpGradients& a, const gptpat::MlpGradients& b) {
  double worst = 0.0;
  auto compare = [&](double x, double y) {
    double scale = std::max({std::abs(x), std::abs(y), 1e-8});
    worst = std::max(worst, std::abs(x - y) / scale);
  };
  for (Eigen::Index r = 0; r < a.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < a.w1.cols(); ++c) compare(a.w1(r, c), b.w1(r, c));
  for (Eigen::Index r = 0; r < a.b1.size(); ++r) compare(a.b1[r], b.b1[r]);
  for (Eigen::Index r = 0; r < a.w2.size(); ++r) compare(a.w2[r], b.w2[r]);
  compare(a.b2, b.b2);
  return worst;
}

struct OracleMetrics {
  double accuracy, precision, recall, f1;
};

// Metrics recomputed from raw (truth, predicted) lists by literal counting.
inline OracleMetrics metrics_from_lists(const std::vector<gptpat::Label>& truth,
                                        const std::vector<gptpat::Label>& predicted) {
  double tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    bool actual = truth[i] == gptpat::Label::Machine;
    bool guessed = predicted[i] == gptpat::Label::Machine;
    if (actual && guessed) ++tp;
    if (!actual && guessed) ++fp;
    if (actual && !guessed) ++fn;
    if (!actual && !guessed) ++tn;
  }
  OracleMetrics m{};
  double n = tp + fp + fn + tn;
  m.accuracy = (tp + tn) / n;
  m.precision = tp + fp > 0 ? tp / (tp + fp) : (fn == 0 ? 1.0 : 0.0);
  m.recall = tp + fn > 0 ? tp / (tp + fn) : (fp == 0 ? 1.0 : 0.0);
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

}  // namespace oracle
