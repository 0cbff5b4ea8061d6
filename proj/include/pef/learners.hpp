#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <variant>
#include <vector>

#include "pef/dimred.hpp"
#include "pef/error.hpp"
#include "pef/rng.hpp"

namespace pef {

struct TrainingSet {
  Matrix features;          // n x k, post-PCA
  std::vector<int> labels;  // class indices in [0, n_classes)
  int n_classes = 0;

  void validate() const {
    if (features.rows() < 1) throw Error("invalid argument", "empty training set");
    if (static_cast<std::size_t>(features.rows()) != labels.size())
      throw Error("invalid argument", "label count != row count");
    if (!features.allFinite())
      throw Error("invalid argument", "non-finite feature rows");
    for (int y : labels)
      if (y < 0 || y >= n_classes)
        throw Error("invalid argument", "label out of range");
  }

  int present_classes() const {
    std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
    for (int y : labels) seen[static_cast<std::size_t>(y)] = true;
    return static_cast<int>(std::count(seen.begin(), seen.end(), true));
  }
};

struct ScoreVector {
  std::vector<double> scores;
  bool probability_like = false;
};

// Argmax with ties broken by lowest class index.
inline int argmax_class(const std::vector<double>& scores) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)])
      best = i;
  return best;
}

enum class ClassifierKind { Logistic, Svm, Tree, Knn, Gnb };

inline const char* kind_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Logistic: return "logistic";
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::Tree: return "tree";
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::Gnb: return "gnb";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Multi-label logistic regression (one-vs-rest, full-batch gradient descent)

struct LogisticConfig {
  double learning_rate = 0.1;
  int iterations = 500;
  double l2 = 1e-4;
};

struct LogisticData {
  Matrix weights;  // n_classes x k
  Vector bias;     // n_classes
};

// ---------------------------------------------------------------------------
// One-vs-rest linear SVM (stochastic subgradient on hinge loss)

struct SvmConfig {
  double lambda = 1e-3;
  int epochs = 20;
  std::uint64_t seed = 0;
};

struct SvmData {
  Matrix weights;
  Vector bias;
};

// ---------------------------------------------------------------------------
// CART decision tree (Gini impurity, axis-aligned splits)

struct TreeConfig {
  int max_depth = 8;
  int min_leaf = 2;
};

struct TreeNode {
  int feature = -1;       // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> class_fractions;  // leaves only
};

struct TreeData {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

// ---------------------------------------------------------------------------
// k-nearest neighbors

struct KnnConfig {
  int k = 5;
};

struct KnnData {
  Matrix samples;
  std::vector<int> labels;
  int k = 5;
};

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

struct GnbData {
  Matrix means;      // n_classes x k
  Matrix variances;  // n_classes x k, floored
  Vector log_priors; // -inf for classes absent from training
};

struct ClassifierModel {
  ClassifierKind kind;
  int n_classes = 0;
  Eigen::Index dim = 0;
  long param_count = 0;
  long stored_samples = 0;
  std::variant<LogisticData, SvmData, TreeData, KnnData, GnbData> data;
};

// ---------------------------------------------------------------------------
// Fitting

inline ClassifierModel fit_logistic(const TrainingSet& train,
                                    const LogisticConfig& cfg = {}) {
  train.validate();
  if (train.present_classes() < 2)
    throw Error("invalid argument", "logistic regression needs at least 2 classes");
  const Eigen::Index n = train.features.rows();
  const Eigen::Index k = train.features.cols();
  LogisticData data;
  data.weights = Matrix::Zero(train.n_classes, k);
  data.bias = Vector::Zero(train.n_classes);
  for (int c = 0; c < train.n_classes; ++c) {
    Vector target(n);
    for (Eigen::Index i = 0; i < n; ++i)
      target(i) = train.labels[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0;
    Vector w = Vector::Zero(k);
    double b = 0.0;
    for (int it = 0; it < cfg.iterations; ++it) {
      const Vector margin = train.features * w + Vector::Constant(n, b);
      const Vector prob = 1.0 / (1.0 + (-margin.array()).exp());
      const Vector residual = prob - target;
      const Vector grad_w =
          train.features.transpose() * residual / static_cast<double>(n) +
          cfg.l2 * w;
      const double grad_b = residual.sum() / static_cast<double>(n);
      w -= cfg.learning_rate * grad_w;
      b -= cfg.learning_rate * grad_b;
      if (!w.allFinite() || !std::isfinite(b))
        throw Error("divergent training",
                    "logistic class " + std::to_string(c) + " diverged");
    }
    data.weights.row(c) = w.transpose();
    data.bias(c) = b;
  }
  ClassifierModel model{ClassifierKind::Logistic, train.n_classes, k,
                        static_cast<long>(k + 1) * train.n_classes, 0,
                        std::move(data)};
  return model;
}

inline ClassifierModel fit_svm(const TrainingSet& train, const SvmConfig& cfg = {}) {
  train.validate();
  if (cfg.lambda <= 0.0) throw Error("invalid argument", "svm lambda must be > 0");
  if (train.present_classes() < 2)
    throw Error("invalid argument", "one-vs-rest svm needs at least 2 classes");
  const Eigen::Index n = train.features.rows();
  const Eigen::Index k = train.features.cols();
  SvmData data;
  data.weights = Matrix::Zero(train.n_classes, k);
  data.bias = Vector::Zero(train.n_classes);
  for (int c = 0; c < train.n_classes; ++c) {
    Vector w = Vector::Zero(k);
    double b = 0.0;
    // The last-iterate solution is noisy; average the iterates from the
    // second half of the epochs instead.
    Vector w_avg = Vector::Zero(k);
    double b_avg = 0.0;
    long averaged = 0;
    Rng rng(derive_seed(cfg.seed, "svm/class", static_cast<std::uint64_t>(c)));
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    long t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      rng.shuffle(order);
      for (auto i : order) {
        ++t;
        const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
        const double y =
            train.labels[i] == c ? 1.0 : -1.0;
        const auto x = train.features.row(static_cast<Eigen::Index>(i));
        const double margin = y * (x.dot(w) + b);
        w *= (1.0 - eta * cfg.lambda);
        if (margin < 1.0) {
          w += eta * y * x.transpose();
          b += eta * y;
        }
        if (epoch >= cfg.epochs / 2) {
          w_avg += w;
          b_avg += b;
          ++averaged;
        }
      }
    }
    if (averaged > 0) {
      w = w_avg / static_cast<double>(averaged);
      b = b_avg / static_cast<double>(averaged);
    }
    data.weights.row(c) = w.transpose();
    data.bias(c) = b;
  }
  ClassifierModel model{ClassifierKind::Svm, train.n_classes, k,
                        static_cast<long>(k + 1) * train.n_classes, 0,
                        std::move(data)};
  return model;
}

namespace detail {

inline double gini(const std::vector<long>& counts, long total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (long c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += f * f;
  }
  return 1.0 - sum_sq;
}

struct TreeBuilder {
  const Matrix& x;
  const std::vector<int>& y;
  int n_classes;
  TreeConfig cfg;
  std::vector<TreeNode> nodes;

  int build(std::vector<std::size_t> members, int depth) {
    std::vector<long> counts(static_cast<std::size_t>(n_classes), 0);
    for (auto i : members) ++counts[static_cast<std::size_t>(y[i])];
    const long total = static_cast<long>(members.size());

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = gini(counts, total);
    const double parent_impurity = best_impurity;

    if (depth < cfg.max_depth && parent_impurity > 0.0) {
      for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
        std::vector<std::size_t> sorted = members;
        std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
          const double va = x(static_cast<Eigen::Index>(a), f);
          const double vb = x(static_cast<Eigen::Index>(b), f);
          return va < vb || (va == vb && a < b);
        });
        std::vector<long> left_counts(static_cast<std::size_t>(n_classes), 0);
        for (std::size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
          ++left_counts[static_cast<std::size_t>(y[sorted[pos]])];
          const double v = x(static_cast<Eigen::Index>(sorted[pos]), f);
          const double vnext = x(static_cast<Eigen::Index>(sorted[pos + 1]), f);
          if (v == vnext) continue;
          const long n_left = static_cast<long>(pos + 1);
          const long n_right = total - n_left;
          if (n_left < cfg.min_leaf || n_right < cfg.min_leaf) continue;
          std::vector<long> right_counts(counts);
          for (std::size_t c = 0; c < right_counts.size(); ++c)
            right_counts[c] -= left_counts[c];
          const double impurity =
              (static_cast<double>(n_left) * gini(left_counts, n_left) +
               static_cast<double>(n_right) * gini(right_counts, n_right)) /
              static_cast<double>(total);
          const double threshold = 0.5 * (v + vnext);
          // Scan order is increasing feature then increasing threshold, so
          // keeping the first strict improvement implements the tie rule
          // (lowest feature index, then lowest threshold).
          if (impurity < best_impurity - 1e-15) {
            best_impurity = impurity;
            best_feature = f;
            best_threshold = threshold;
          }
        }
      }
    }

    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (best_feature < 0 || best_impurity >= parent_impurity) {
      auto& leaf = nodes[static_cast<std::size_t>(node_id)];
      leaf.class_fractions.resize(static_cast<std::size_t>(n_classes));
      for (int c = 0; c < n_classes; ++c)
        leaf.class_fractions[static_cast<std::size_t>(c)] =
            static_cast<double>(counts[static_cast<std::size_t>(c)]) /
            static_cast<double>(total);
      return node_id;
    }

    std::vector<std::size_t> left_members, right_members;
    for (auto i : members) {
      if (x(static_cast<Eigen::Index>(i), best_feature) <= best_threshold)
        left_members.push_back(i);
      else
        right_members.push_back(i);
    }
    const int left = build(std::move(left_members), depth + 1);
    const int right = build(std::move(right_members), depth + 1);
    auto& node = nodes[static_cast<std::size_t>(node_id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return node_id;
  }
};

}  // namespace detail

inline ClassifierModel fit_tree(const TrainingSet& train, const TreeConfig& cfg = {}) {
  train.validate();
  if (train.features.rows() < cfg.min_leaf)
    throw Error("invalid argument", "fewer samples than min leaf size");
  detail::TreeBuilder builder{train.features, train.labels, train.n_classes, cfg, {}};
  std::vector<std::size_t> all(static_cast<std::size_t>(train.features.rows()));
  std::iota(all.begin(), all.end(), 0);
  builder.build(std::move(all), 0);
  long internal = 0, leaves = 0;
  for (const auto& node : builder.nodes)
    (node.feature >= 0 ? internal : leaves)++;
  ClassifierModel model{ClassifierKind::Tree, train.n_classes,
                        train.features.cols(), 2 * internal + leaves, 0,
                        TreeData{std::move(builder.nodes)}};
  return model;
}

inline ClassifierModel fit_knn(const TrainingSet& train, const KnnConfig& cfg = {}) {
  train.validate();
  if (cfg.k < 1 || cfg.k > static_cast<int>(train.features.rows()))
    throw Error("invalid argument", "neighbor count exceeds training size");
  KnnData data{train.features, train.labels, cfg.k};
  ClassifierModel model{ClassifierKind::Knn, train.n_classes,
                        train.features.cols(), 0, train.features.rows(),
                        std::move(data)};
  return model;
}

inline ClassifierModel fit_gnb(const TrainingSet& train, bool allow_sparse = false) {
  train.validate();
  const Eigen::Index k = train.features.cols();
  GnbData data;
  data.means = Matrix::Zero(train.n_classes, k);
  data.variances = Matrix::Constant(train.n_classes, k, 1.0);
  data.log_priors =
      Vector::Constant(train.n_classes, -std::numeric_limits<double>::infinity());
  const double n = static_cast<double>(train.features.rows());
  long modeled = 0;
  for (int c = 0; c < train.n_classes; ++c) {
    std::vector<Eigen::Index> members;
    for (std::size_t i = 0; i < train.labels.size(); ++i)
      if (train.labels[i] == c) members.push_back(static_cast<Eigen::Index>(i));
    if (members.empty()) continue;
    if (members.size() < 2) {
      if (allow_sparse) continue;  // class never predicted
      throw Error("invalid argument",
                  "class " + std::to_string(c) + " has fewer than 2 samples");
    }
    Matrix rows(members.size(), k);
    for (std::size_t i = 0; i < members.size(); ++i)
      rows.row(static_cast<Eigen::Index>(i)) = train.features.row(members[i]);
    const Vector mean = rows.colwise().mean();
    Vector var = (rows.rowwise() - mean.transpose())
                     .array()
                     .square()
                     .colwise()
                     .sum()
                     .transpose() /
                 static_cast<double>(members.size());
    var = var.cwiseMax(1e-9);
    data.means.row(c) = mean.transpose();
    data.variances.row(c) = var.transpose();
    data.log_priors(c) = std::log(static_cast<double>(members.size()) / n);
    ++modeled;
  }
  if (modeled == 0) throw Error("invalid argument", "no class with enough samples");
  ClassifierModel model{ClassifierKind::Gnb, train.n_classes, k,
                        2 * static_cast<long>(k) * train.n_classes + train.n_classes,
                        0, std::move(data)};
  return model;
}

// ---------------------------------------------------------------------------
// Prediction

namespace detail {

inline std::vector<double> softmax(const Vector& margins) {
  const double m = margins.maxCoeff();
  std::vector<double> out(static_cast<std::size_t>(margins.size()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    out[static_cast<std::size_t>(i)] = std::exp(margins(i) - m);
    sum += out[static_cast<std::size_t>(i)];
  }
  for (auto& v : out) v /= sum;
  return out;
}

}  // namespace detail

inline ScoreVector predict_scores(const ClassifierModel& model, const Vector& x) {
  if (x.size() != model.dim)
    throw Error("dimension mismatch", "query dimension != training dimension");
  ScoreVector result;
  result.probability_like = true;
  switch (model.kind) {
    case ClassifierKind::Logistic: {
      const auto& d = std::get<LogisticData>(model.data);
      const Vector margin = d.weights * x + d.bias;
      Vector prob = 1.0 / (1.0 + (-margin.array()).exp());
      const double sum = prob.sum();
      result.scores.resize(static_cast<std::size_t>(prob.size()));
      for (Eigen::Index i = 0; i < prob.size(); ++i)
        result.scores[static_cast<std::size_t>(i)] =
            sum > 0.0 ? prob(i) / sum : 1.0 / static_cast<double>(prob.size());
      break;
    }
    case ClassifierKind::Svm: {
      const auto& d = std::get<SvmData>(model.data);
      result.scores = detail::softmax(d.weights * x + d.bias);
      break;
    }
    case ClassifierKind::Tree: {
      const auto& d = std::get<TreeData>(model.data);
      int node = 0;
      while (d.nodes[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = d.nodes[static_cast<std::size_t>(node)];
        node = x(nd.feature) <= nd.threshold ? nd.left : nd.right;
      }
      result.scores = d.nodes[static_cast<std::size_t>(node)].class_fractions;
      break;
    }
    case ClassifierKind::Knn: {
      const auto& d = std::get<KnnData>(model.data);
      const Eigen::Index n = d.samples.rows();
      std::vector<std::pair<double, std::size_t>> dist(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i)
        dist[static_cast<std::size_t>(i)] = {
            (d.samples.row(i).transpose() - x).squaredNorm(),
            static_cast<std::size_t>(i)};
      // Distance ties break toward the lower sample index.
      std::partial_sort(dist.begin(), dist.begin() + d.k, dist.end());
      result.scores.assign(static_cast<std::size_t>(model.n_classes), 0.0);
      for (int i = 0; i < d.k; ++i)
        result.scores[static_cast<std::size_t>(
            d.labels[dist[static_cast<std::size_t>(i)].second])] +=
            1.0 / static_cast<double>(d.k);
      break;
    }
    case ClassifierKind::Gnb: {
      const auto& d = std::get<GnbData>(model.data);
      Vector log_post(model.n_classes);
      for (int c = 0; c < model.n_classes; ++c) {
        if (!std::isfinite(d.log_priors(c))) {
          log_post(c) = -std::numeric_limits<double>::infinity();
          continue;
        }
        double ll = d.log_priors(c);
        for (Eigen::Index j = 0; j < model.dim; ++j) {
          const double diff = x(j) - d.means(c, j);
          ll += -0.5 * std::log(2.0 * 3.141592653589793 * d.variances(c, j)) -
                0.5 * diff * diff / d.variances(c, j);
        }
        log_post(c) = ll;
      }
      const double m = log_post.maxCoeff();
      double sum = 0.0;
      result.scores.resize(static_cast<std::size_t>(model.n_classes));
      for (int c = 0; c < model.n_classes; ++c) {
        const double v = std::isfinite(log_post(c)) ? std::exp(log_post(c) - m) : 0.0;
        result.scores[static_cast<std::size_t>(c)] = v;
        sum += v;
      }
      for (auto& v : result.scores) v /= sum;
      break;
    }
  }
  return result;
}

inline int predict(const ClassifierModel& model, const Vector& x) {
  return argmax_class(predict_scores(model, x).scores);
}

}  // namespace pef
