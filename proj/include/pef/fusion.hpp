#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pef/error.hpp"
#include "pef/learners.hpp"

namespace pef {

struct VotePanel {
  // votes[sample][classifier] = predicted class index.
  std::vector<std::vector<int>> votes;
  std::vector<double> weights;  // length M, positive, sum 1
  int n_classes = 0;

  std::size_t n_classifiers() const { return weights.size(); }
};

inline std::vector<double> uniform_weights(std::size_t m) {
  return std::vector<double>(m, 1.0 / static_cast<double>(m));
}

// Weights proportional to per-classifier validation accuracy; falls back to
// uniform when every accuracy is zero.
inline std::vector<double> accuracy_weights(const std::vector<double>& accuracies) {
  double sum = 0.0;
  for (double a : accuracies) sum += a;
  if (sum <= 0.0) return uniform_weights(accuracies.size());
  std::vector<double> w(accuracies.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = accuracies[i] / sum;
  return w;
}

struct VoteDistribution {
  // p[sample][class], each row sums to 1.
  std::vector<std::vector<double>> p;
  int n_classes = 0;
};

struct FusionResult {
  std::vector<int> fused;  // argmax class per sample, lowest index on ties
  VoteDistribution dist;
};

// Weighted voting: p(n,k) = sum of the weights of classifiers voting k.
inline FusionResult fuse_votes(const VotePanel& panel) {
  if (panel.votes.empty()) throw Error("invalid argument", "empty vote panel");
  const std::size_t m = panel.n_classifiers();
  if (m < 2) throw Error("invalid argument", "fusion needs at least 2 classifiers");
  double wsum = 0.0;
  for (double w : panel.weights) {
    if (w <= 0.0) throw Error("invalid argument", "nonpositive classifier weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw Error("invalid argument", "classifier weights must sum to 1");

  FusionResult result;
  result.dist.n_classes = panel.n_classes;
  for (const auto& row : panel.votes) {
    if (row.size() != m)
      throw Error("invalid argument", "vote row length != classifier count");
    std::vector<double> p(static_cast<std::size_t>(panel.n_classes), 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const int v = row[j];
      if (v < 0 || v >= panel.n_classes)
        throw Error("invalid argument", "vote outside class range");
      p[static_cast<std::size_t>(v)] += panel.weights[j];
    }
    result.fused.push_back(argmax_class(p));
    result.dist.p.push_back(std::move(p));
  }
  return result;
}

struct ConfidenceReport {
  std::vector<double> entropy;     // nats, per sample
  std::vector<double> confidence;  // 1 - H/log(M), clamped to [0, 1]
  double index = 0.0;              // E, mean per-sample confidence
  std::size_t n_classifiers = 0;   // M used for normalization
};

// Entropy-based agreement index: unanimous votes give confidence 1, M
// mutually distinct uniform-weight votes give 0; E is the sample mean.
inline ConfidenceReport confidence_index(const VoteDistribution& dist,
                                         std::size_t n_classifiers) {
  if (n_classifiers < 2)
    throw Error("invalid argument", "confidence normalizer needs M >= 2");
  ConfidenceReport report;
  report.n_classifiers = n_classifiers;
  const double log_m = std::log(static_cast<double>(n_classifiers));
  double total = 0.0;
  for (const auto& row : dist.p) {
    double h = 0.0;
    double sum = 0.0;
    for (double p : row) {
      sum += p;
      if (p > 0.0) h -= p * std::log(p);
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error("invalid argument", "vote distribution row does not sum to 1");
    double c = 1.0 - h / log_m;
    c = std::min(1.0, std::max(0.0, c));
    report.entropy.push_back(h);
    report.confidence.push_back(c);
    total += c;
  }
  report.index = dist.p.empty() ? 0.0 : total / static_cast<double>(dist.p.size());
  return report;
}

struct RocPoint {
  double fpr;
  double tpr;
};

struct RocResult {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Threshold sweep over distinct scores, descending; tied scores move as one
// step. AUC by the trapezoid rule.
inline RocResult roc_curve(const std::vector<double>& scores,
                           const std::vector<bool>& truth) {
  if (scores.size() != truth.size())
    throw Error("invalid argument", "score/truth length mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (bool t : truth) (t ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw Error("invalid argument", "ROC needs both classes in the truth vector");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocResult result;
  result.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double auc = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (truth[order[j]] ? tp : fp)++;
      ++j;
    }
    const double prev_fpr = result.points.back().fpr;
    const double prev_tpr = result.points.back().tpr;
    const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
    const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
    auc += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
    result.points.push_back({fpr, tpr});
    i = j;
  }
  result.auc = auc;
  return result;
}

struct Decision {
  int fused_class = 0;
  double confidence = 0.0;
  bool accepted = false;  // false = flagged low-confidence
};

inline Decision decide(int fused_class, double confidence, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw Error("invalid argument", "threshold must be in [0, 1]");
  return {fused_class, confidence, confidence >= threshold};
}

}  // namespace pef
