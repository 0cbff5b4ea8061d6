#pragma once

#include <cstdint>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pef/dimred.hpp"
#include "pef/error.hpp"
#include "pef/fusion.hpp"
#include "pef/learners.hpp"
#include "pef/windowing.hpp"

namespace pef {

// Mean zero-one error: fraction of samples whose predicted class (full label
// pattern) differs from the truth.
inline double mze(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw Error("invalid argument", "prediction/truth length mismatch");
  if (predicted.empty()) throw Error("invalid argument", "empty inputs");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] != truth[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

// Maps label-vector patterns to class ids: normal = 0, single-hot candidate c
// = c, then observed multi-hot patterns in lexicographic order.
class PatternCodec {
 public:
  static PatternCodec from_labels(const std::vector<LabelVector>& labels) {
    if (labels.empty()) throw Error("invalid argument", "no labels");
    PatternCodec codec;
    const std::size_t width = labels.front().bits.size();
    codec.n_candidates_ = width - 1;
    std::string normal(width, '0');
    normal[0] = '1';
    codec.patterns_.push_back(normal);
    for (std::size_t c = 1; c < width; ++c) {
      std::string p(width, '0');
      p[c] = '1';
      codec.patterns_.push_back(p);
    }
    std::map<std::string, bool> extra;
    for (const auto& l : labels) {
      const std::string p = l.pattern();
      if (std::find(codec.patterns_.begin(), codec.patterns_.end(), p) ==
          codec.patterns_.end())
        extra[p] = true;
    }
    for (const auto& [p, _] : extra) codec.patterns_.push_back(p);
    for (std::size_t i = 0; i < codec.patterns_.size(); ++i)
      codec.index_[codec.patterns_[i]] = static_cast<int>(i);
    return codec;
  }

  static PatternCodec from_patterns(const std::vector<std::string>& patterns) {
    if (patterns.empty()) throw Error("invalid argument", "no patterns");
    PatternCodec codec;
    codec.patterns_ = patterns;
    codec.n_candidates_ = patterns.front().size() - 1;
    for (std::size_t i = 0; i < patterns.size(); ++i)
      codec.index_[patterns[i]] = static_cast<int>(i);
    return codec;
  }

  int encode(const LabelVector& label) const {
    auto it = index_.find(label.pattern());
    if (it == index_.end())
      throw Error("invalid argument", "unseen label pattern " + label.pattern());
    return it->second;
  }

  LabelVector decode(int class_id) const {
    const auto& p = patterns_.at(static_cast<std::size_t>(class_id));
    LabelVector v;
    for (char c : p) v.bits.push_back(c == '1' ? 1 : 0);
    return v;
  }

  int n_classes() const { return static_cast<int>(patterns_.size()); }
  const std::vector<std::string>& patterns() const { return patterns_; }

 private:
  std::vector<std::string> patterns_;
  std::map<std::string, int> index_;
  std::size_t n_candidates_ = 0;
};

enum class WeightMode { Uniform, Accuracy };

struct PipelineConfig {
  Eigen::Index k_pca = 50;
  bool standardize = true;
  LogisticConfig logistic;
  SvmConfig svm;
  TreeConfig tree;
  KnnConfig knn;
  WeightMode weight_mode = WeightMode::Uniform;
  double confidence_threshold = 0.5;
};

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"logistic", "svm", "tree", "knn", "gnb"};
  return names;
}

struct EvalReport {
  std::vector<std::string> methods;
  // fold_mze[method][fold]
  std::vector<std::vector<double>> fold_mze;
  std::vector<double> mean_mze;
  std::vector<long> param_count;
  std::vector<double> fused_fold_mze;
  double fused_mean_mze = 0.0;
  std::vector<double> fold_confidence;  // E per fold
  double confidence_index = 0.0;        // E over all held-out samples
  std::vector<std::string> class_patterns;
  std::vector<std::string> warnings;
  std::string fingerprint;
};

// Per fold: standardizer + PCA + all five classifiers are fit on the train
// folds only, then evaluated on the held-out fold. Fused predictions come
// from weighted voting over the five per-sample votes.
inline EvalReport cross_validate(const Dataset& dataset,
                                 const PipelineConfig& cfg, int k,
                                 std::uint64_t seed) {
  Dataset ds = dataset;
  bool have_folds = !ds.folds.empty();
  for (int f : ds.folds)
    if (f < 0 || f >= k) have_folds = false;
  if (!have_folds) split_folds(ds, k, derive_seed(seed, "cv/folds"));

  const PatternCodec codec = PatternCodec::from_labels(ds.labels);
  std::vector<int> classes(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) classes[i] = codec.encode(ds.labels[i]);

  EvalReport report;
  report.methods = method_names();
  report.class_patterns = codec.patterns();
  const std::size_t n_methods = report.methods.size();
  report.fold_mze.assign(n_methods, {});
  report.param_count.assign(n_methods, 0);

  double confidence_sum = 0.0;
  std::size_t confidence_n = 0;

  for (int fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
      (ds.folds[i] == fold ? test_idx : train_idx).push_back(i);
    if (train_idx.empty() || test_idx.empty())
      throw Error("invalid argument", "empty fold " + std::to_string(fold));

    auto gather = [&](const std::vector<std::size_t>& idx) {
      Matrix m(idx.size(), static_cast<Eigen::Index>(ds.features.front().size()));
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < ds.features[idx[i]].size(); ++j)
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              ds.features[idx[i]][j];
      return m;
    };
    Matrix train_x = gather(train_idx);
    Matrix test_x = gather(test_idx);
    if (cfg.standardize) {
      const Standardizer std_ = fit_standardizer(train_x);
      train_x = std_.apply(train_x);
      test_x = std_.apply(test_x);
    }
    Eigen::Index k_eff = std::min(cfg.k_pca, std::min(train_x.rows(), train_x.cols()));
    if (k_eff < cfg.k_pca)
      report.warnings.push_back("fold " + std::to_string(fold) +
                                ": k_pca clipped to " + std::to_string(k_eff));
    const PcaModel pca = fit_pca(train_x, k_eff);
    const Matrix train_z = project(pca, train_x);
    const Matrix test_z = project(pca, test_x);

    TrainingSet train;
    train.features = train_z;
    train.n_classes = codec.n_classes();
    for (auto i : train_idx) train.labels.push_back(classes[i]);
    if (train.present_classes() < codec.n_classes())
      report.warnings.push_back("fold " + std::to_string(fold) +
                                ": training folds missing a class present elsewhere");

    std::vector<ClassifierModel> models;
    models.push_back(fit_logistic(train, cfg.logistic));
    {
      SvmConfig svm_cfg = cfg.svm;
      svm_cfg.seed = derive_seed(seed, "cv/svm", static_cast<std::uint64_t>(fold));
      models.push_back(fit_svm(train, svm_cfg));
    }
    models.push_back(fit_tree(train, cfg.tree));
    {
      KnnConfig knn_cfg = cfg.knn;
      knn_cfg.k = std::min(knn_cfg.k, static_cast<int>(train_idx.size()));
      models.push_back(fit_knn(train, knn_cfg));
    }
    models.push_back(fit_gnb(train, /*allow_sparse=*/true));

    std::vector<int> truth;
    for (auto i : test_idx) truth.push_back(classes[i]);

    VotePanel panel;
    panel.n_classes = codec.n_classes();
    panel.votes.assign(test_idx.size(), std::vector<int>(n_methods, 0));
    for (std::size_t m = 0; m < n_methods; ++m) {
      std::vector<int> preds;
      for (std::size_t i = 0; i < test_idx.size(); ++i) {
        const int p = predict(models[m], test_z.row(static_cast<Eigen::Index>(i)).transpose());
        panel.votes[i][m] = p;
        preds.push_back(p);
      }
      report.fold_mze[m].push_back(mze(preds, truth));
      if (fold == 0) report.param_count[m] = models[m].param_count;
    }

    if (cfg.weight_mode == WeightMode::Accuracy) {
      std::vector<double> acc;
      for (std::size_t m = 0; m < n_methods; ++m) {
        std::vector<int> preds;
        for (Eigen::Index i = 0; i < train_z.rows(); ++i)
          preds.push_back(predict(models[m], train_z.row(i).transpose()));
        acc.push_back(1.0 - mze(preds, train.labels));
      }
      panel.weights = accuracy_weights(acc);
    } else {
      panel.weights = uniform_weights(n_methods);
    }

    const FusionResult fused = fuse_votes(panel);
    report.fused_fold_mze.push_back(mze(fused.fused, truth));
    const ConfidenceReport conf = confidence_index(fused.dist, n_methods);
    report.fold_confidence.push_back(conf.index);
    for (double c : conf.confidence) confidence_sum += c;
    confidence_n += conf.confidence.size();
  }

  report.mean_mze.assign(n_methods, 0.0);
  for (std::size_t m = 0; m < n_methods; ++m) {
    double sum = 0.0;
    for (double v : report.fold_mze[m]) sum += v;
    report.mean_mze[m] = sum / static_cast<double>(report.fold_mze[m].size());
  }
  double fused_sum = 0.0;
  for (double v : report.fused_fold_mze) fused_sum += v;
  report.fused_mean_mze = fused_sum / static_cast<double>(report.fused_fold_mze.size());
  report.confidence_index =
      confidence_n ? confidence_sum / static_cast<double>(confidence_n) : 0.0;
  return report;
}

// Table-3 style rendering: one row per report, one column per method, cells
// formatted "MZE/param_count".
inline std::string render_table(const std::vector<std::string>& row_names,
                                const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw Error("invalid argument", "no reports");
  std::ostringstream out;
  const auto& methods = reports.front().methods;
  std::size_t name_w = 6;
  for (const auto& n : row_names) name_w = std::max(name_w, n.size());
  out << std::left << std::setw(static_cast<int>(name_w + 2)) << "system";
  for (const auto& m : methods) out << std::setw(14) << m;
  out << std::setw(14) << "fused" << "\n";
  for (std::size_t r = 0; r < reports.size(); ++r) {
    out << std::setw(static_cast<int>(name_w + 2)) << row_names[r];
    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::ostringstream cell;
      cell << std::setprecision(3) << reports[r].mean_mze[m] << "/"
           << reports[r].param_count[m];
      out << std::setw(14) << cell.str();
    }
    std::ostringstream cell;
    cell << std::setprecision(3) << reports[r].fused_mean_mze << "/-";
    out << std::setw(14) << cell.str() << "\n";
  }
  return out.str();
}

struct SweepPoint {
  double penetration;
  double mean_fused_mze;
  int n_placements;  // placements actually averaged (degenerate ones skipped)
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<std::string> skipped;  // reasons for skipped placements
};

}  // namespace pef
