#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "pef/dimred.hpp"
#include "pef/error.hpp"
#include "pef/eval.hpp"
#include "pef/learners.hpp"
#include "pef/simulate.hpp"
#include "pef/windowing.hpp"

namespace pef {

using Json = nlohmann::ordered_json;

// Atomic write: temp file in the target directory, then rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw Error("io", "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Events

inline Json events_to_json(const std::vector<EventRecord>& events) {
  Json arr = Json::array();
  for (const auto& e : events)
    arr.push_back({{"line", e.line},
                   {"overload_start", e.overload_start},
                   {"trip_time", e.trip_time}});
  return arr;
}

inline std::vector<EventRecord> events_from_json(const Json& arr) {
  std::vector<EventRecord> events;
  for (const auto& e : arr)
    events.push_back({e.at("line").get<LineId>(),
                      e.at("overload_start").get<std::size_t>(),
                      e.at("trip_time").get<std::size_t>()});
  return events;
}

// ---------------------------------------------------------------------------
// Dimensionality reduction bundle
// Schema: {d, k, mean[], scale[], components (row-major), singular_values[]}
// where mean/scale describe the standardizer applied before projection.

inline Json reducer_to_json(const Standardizer& std_, const PcaModel& pca) {
  Json j;
  j["d"] = pca.d;
  j["k"] = pca.k;
  j["mean"] = std::vector<double>(std_.mean.data(), std_.mean.data() + std_.mean.size());
  j["scale"] = std::vector<double>(std_.scale.data(), std_.scale.data() + std_.scale.size());
  j["pca_mean"] = std::vector<double>(pca.mean.data(), pca.mean.data() + pca.mean.size());
  std::vector<double> comps;
  comps.reserve(static_cast<std::size_t>(pca.d * pca.k));
  for (Eigen::Index r = 0; r < pca.d; ++r)
    for (Eigen::Index c = 0; c < pca.k; ++c) comps.push_back(pca.components(r, c));
  j["components"] = comps;
  j["singular_values"] = std::vector<double>(
      pca.singular_values.data(),
      pca.singular_values.data() + pca.singular_values.size());
  return j;
}

inline std::pair<Standardizer, PcaModel> reducer_from_json(const Json& j) {
  Standardizer std_;
  PcaModel pca;
  pca.d = j.at("d").get<Eigen::Index>();
  pca.k = j.at("k").get<Eigen::Index>();
  auto vec = [](const Json& a) {
    Vector v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i];
    return v;
  };
  std_.mean = vec(j.at("mean"));
  std_.scale = vec(j.at("scale"));
  pca.mean = vec(j.at("pca_mean"));
  pca.singular_values = vec(j.at("singular_values"));
  const auto& comps = j.at("components");
  if (static_cast<Eigen::Index>(comps.size()) != pca.d * pca.k)
    throw Error("schema violation", "components: expected d*k entries");
  pca.components.resize(pca.d, pca.k);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < pca.d; ++r)
    for (Eigen::Index c = 0; c < pca.k; ++c) pca.components(r, c) = comps[i++];
  return {std_, pca};
}

// ---------------------------------------------------------------------------
// Classifier models

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

inline Json classifier_to_json(const ClassifierModel& model) {
  Json j;
  j["kind"] = kind_name(model.kind);
  j["version"] = 1;
  j["n_classes"] = model.n_classes;
  j["dim"] = model.dim;
  j["param_count"] = model.param_count;
  j["stored_samples"] = model.stored_samples;
  switch (model.kind) {
    case ClassifierKind::Logistic: {
      const auto& d = std::get<LogisticData>(model.data);
      j["weights"] = matrix_to_json(d.weights);
      j["bias"] = std::vector<double>(d.bias.data(), d.bias.data() + d.bias.size());
      break;
    }
    case ClassifierKind::Svm: {
      const auto& d = std::get<SvmData>(model.data);
      j["weights"] = matrix_to_json(d.weights);
      j["bias"] = std::vector<double>(d.bias.data(), d.bias.data() + d.bias.size());
      break;
    }
    case ClassifierKind::Tree: {
      const auto& d = std::get<TreeData>(model.data);
      Json nodes = Json::array();
      for (const auto& n : d.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"class_fractions", n.class_fractions}});
      j["nodes"] = nodes;
      break;
    }
    case ClassifierKind::Knn: {
      const auto& d = std::get<KnnData>(model.data);
      j["samples"] = matrix_to_json(d.samples);
      j["labels"] = d.labels;
      j["k"] = d.k;
      break;
    }
    case ClassifierKind::Gnb: {
      const auto& d = std::get<GnbData>(model.data);
      j["means"] = matrix_to_json(d.means);
      j["variances"] = matrix_to_json(d.variances);
      std::vector<double> priors;
      for (Eigen::Index i = 0; i < d.log_priors.size(); ++i)
        priors.push_back(std::isfinite(d.log_priors(i)) ? d.log_priors(i) : -1e308);
      j["log_priors"] = priors;
      break;
    }
  }
  return j;
}

inline ClassifierModel classifier_from_json(const Json& j) {
  ClassifierModel model;
  const std::string kind = j.at("kind").get<std::string>();
  model.n_classes = j.at("n_classes").get<int>();
  model.dim = j.at("dim").get<Eigen::Index>();
  model.param_count = j.at("param_count").get<long>();
  model.stored_samples = j.at("stored_samples").get<long>();
  auto vec = [](const Json& a) {
    Vector v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i];
    return v;
  };
  if (kind == "logistic") {
    model.kind = ClassifierKind::Logistic;
    model.data = LogisticData{matrix_from_json(j.at("weights")), vec(j.at("bias"))};
  } else if (kind == "svm") {
    model.kind = ClassifierKind::Svm;
    model.data = SvmData{matrix_from_json(j.at("weights")), vec(j.at("bias"))};
  } else if (kind == "tree") {
    model.kind = ClassifierKind::Tree;
    TreeData d;
    for (const auto& n : j.at("nodes")) {
      TreeNode node;
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
      node.class_fractions = n.at("class_fractions").get<std::vector<double>>();
      d.nodes.push_back(std::move(node));
    }
    model.data = std::move(d);
  } else if (kind == "knn") {
    model.kind = ClassifierKind::Knn;
    model.data = KnnData{matrix_from_json(j.at("samples")),
                         j.at("labels").get<std::vector<int>>(), j.at("k").get<int>()};
  } else if (kind == "gnb") {
    model.kind = ClassifierKind::Gnb;
    GnbData d;
    d.means = matrix_from_json(j.at("means"));
    d.variances = matrix_from_json(j.at("variances"));
    d.log_priors = vec(j.at("log_priors"));
    for (Eigen::Index i = 0; i < d.log_priors.size(); ++i)
      if (d.log_priors(i) <= -1e307)
        d.log_priors(i) = -std::numeric_limits<double>::infinity();
    model.data = std::move(d);
  } else {
    throw Error("schema violation", "unknown classifier kind '" + kind + "'");
  }
  return model;
}

// ---------------------------------------------------------------------------
// Dataset: CSV (features then label bits, one sample per row) + JSON sidecar.

inline std::string dataset_to_csv(const Dataset& ds) {
  std::ostringstream out;
  char buf[32];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.features[i].size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.features[i][j]);
      out << buf << ',';
    }
    for (std::size_t b = 0; b < ds.labels[i].bits.size(); ++b) {
      out << static_cast<int>(ds.labels[i].bits[b]);
      out << (b + 1 < ds.labels[i].bits.size() ? ',' : '\n');
    }
  }
  return out.str();
}

inline Json dataset_meta_to_json(const Dataset& ds) {
  Json j;
  j["A"] = ds.meta.window_len;
  j["B"] = ds.meta.n_features;
  j["C"] = ds.meta.n_candidates;
  j["horizon"] = ds.meta.horizon;
  j["stride"] = ds.meta.stride;
  j["source_seed"] = ds.meta.source_seed;
  j["fingerprint"] = ds.meta.config_fingerprint;
  Json order = Json::array();
  for (const auto& [bus, ch] : ds.meta.feature_order) order.push_back({bus, ch});
  j["feature_order"] = order;
  j["folds"] = ds.folds;
  return j;
}

inline Dataset dataset_from_csv(const std::string& csv, const Json& meta) {
  Dataset ds;
  ds.meta.window_len = meta.at("A").get<std::size_t>();
  ds.meta.n_features = meta.at("B").get<std::size_t>();
  ds.meta.n_candidates = meta.at("C").get<std::size_t>();
  ds.meta.horizon = meta.at("horizon").get<std::size_t>();
  ds.meta.stride = meta.at("stride").get<std::size_t>();
  ds.meta.source_seed = meta.at("source_seed").get<std::uint64_t>();
  if (meta.contains("fingerprint"))
    ds.meta.config_fingerprint = meta.at("fingerprint").get<std::string>();
  for (const auto& pair : meta.at("feature_order"))
    ds.meta.feature_order.emplace_back(pair[0].get<BusId>(), pair[1].get<int>());
  const std::size_t feat_len = ds.meta.window_len * ds.meta.n_features;
  const std::size_t label_len = ds.meta.n_candidates + 1;

  std::istringstream in(csv);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> values;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != feat_len + label_len)
      throw Error("schema violation",
                  "dataset row " + std::to_string(lineno) + ": expected " +
                      std::to_string(feat_len + label_len) + " fields, got " +
                      std::to_string(values.size()));
    ds.features.emplace_back(values.begin(),
                             values.begin() + static_cast<std::ptrdiff_t>(feat_len));
    LabelVector label;
    for (std::size_t b = 0; b < label_len; ++b)
      label.bits.push_back(values[feat_len + b] != 0.0 ? 1 : 0);
    label.validate();
    ds.labels.push_back(std::move(label));
  }
  if (meta.contains("folds") && !meta.at("folds").empty())
    ds.folds = meta.at("folds").get<std::vector<int>>();
  else
    ds.folds.assign(ds.size(), -1);
  if (ds.folds.size() != ds.size())
    throw Error("schema violation", "folds: length != sample count");
  return ds;
}

// ---------------------------------------------------------------------------
// Reports

inline Json eval_report_to_json(const EvalReport& r) {
  Json j;
  j["fingerprint"] = r.fingerprint;
  j["methods"] = r.methods;
  j["fold_mze"] = r.fold_mze;
  j["mean_mze"] = r.mean_mze;
  j["param_count"] = r.param_count;
  j["fused_fold_mze"] = r.fused_fold_mze;
  j["fused_mean_mze"] = r.fused_mean_mze;
  j["fold_confidence"] = r.fold_confidence;
  j["confidence_index"] = r.confidence_index;
  j["class_patterns"] = r.class_patterns;
  j["warnings"] = r.warnings;
  return j;
}

inline std::string sweep_to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "penetration,mze,n_placements\n";
  char buf[80];
  for (const auto& p : sweep.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", p.penetration,
                  p.mean_fused_mze, p.n_placements);
    out << buf;
  }
  return out.str();
}

inline Json sweep_to_json(const SweepResult& sweep) {
  Json j;
  Json pts = Json::array();
  for (const auto& p : sweep.points)
    pts.push_back({{"penetration", p.penetration},
                   {"mze", p.mean_fused_mze},
                   {"n_placements", p.n_placements}});
  j["points"] = pts;
  j["skipped"] = sweep.skipped;
  return j;
}

inline Json confidence_to_json(const ConfidenceReport& report,
                               const std::vector<int>& fused,
                               double threshold) {
  Json j;
  j["E"] = report.index;
  j["M"] = report.n_classifiers;
  Json per = Json::array();
  for (std::size_t i = 0; i < report.confidence.size(); ++i)
    per.push_back({{"fused_class", fused[i]},
                   {"confidence", report.confidence[i]},
                   {"flagged", report.confidence[i] < threshold}});
  j["per_sample"] = per;
  return j;
}

inline std::string roc_to_csv(const RocResult& roc) {
  std::ostringstream out;
  out << "fpr,tpr\n";
  char buf[64];
  for (const auto& p : roc.points) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.fpr, p.tpr);
    out << buf;
  }
  return out.str();
}

}  // namespace pef
