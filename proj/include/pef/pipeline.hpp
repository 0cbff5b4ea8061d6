#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "pef/eval.hpp"
#include "pef/grid.hpp"
#include "pef/io.hpp"
#include "pef/load_profile.hpp"
#include "pef/simulate.hpp"
#include "pef/windowing.hpp"

namespace pef {

// Full run configuration; every pipeline stage draws its randomness from the
// single master seed via role-tagged child seeds.
struct RunConfig {
  std::string case_name = "toy5";

  // Simulation
  int days = 8;                  // independent one-day traces
  int seconds_per_slot = 60;
  double noise_std = 0.0002;     // per measurement channel
  std::size_t trip_tau = 36;
  double stress_day_fraction = 0.7;
  double stress_factor = 16.0;
  double base_load_mean = 0.08;

  // Windowing
  std::size_t window_len = 166;  // A
  std::size_t stride = 10;
  std::size_t horizon = 30;

  // Pipeline
  Eigen::Index k_pca = 50;
  bool standardize = true;
  std::string weights_mode = "uniform";  // or "accuracy"
  double confidence_threshold = 0.5;

  // Evaluation
  int folds = 3;
  double penetration = 0.2;
  std::vector<double> penetrations = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
  int placements = 5;

  std::uint64_t seed = 42;
  std::string out_dir = "out";
};

inline Json run_config_to_json(const RunConfig& c) {
  Json j;
  j["case"] = c.case_name;
  j["days"] = c.days;
  j["seconds_per_slot"] = c.seconds_per_slot;
  j["noise_std"] = c.noise_std;
  j["trip_tau"] = c.trip_tau;
  j["stress_day_fraction"] = c.stress_day_fraction;
  j["stress_factor"] = c.stress_factor;
  j["base_load_mean"] = c.base_load_mean;
  j["window_len"] = c.window_len;
  j["stride"] = c.stride;
  j["horizon"] = c.horizon;
  j["k_pca"] = c.k_pca;
  j["standardize"] = c.standardize;
  j["weights_mode"] = c.weights_mode;
  j["confidence_threshold"] = c.confidence_threshold;
  j["folds"] = c.folds;
  j["penetration"] = c.penetration;
  j["penetrations"] = c.penetrations;
  j["placements"] = c.placements;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  return j;
}

inline RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  const std::set<std::string> known = {
      "case", "days", "seconds_per_slot", "noise_std", "trip_tau",
      "stress_day_fraction", "stress_factor", "base_load_mean", "window_len",
      "stride", "horizon", "k_pca", "standardize", "weights_mode",
      "confidence_threshold", "folds", "penetration", "penetrations",
      "placements", "seed", "out_dir"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw Error("schema violation", "unknown config key '" + it.key() + "'");
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("case", c.case_name);
  get("days", c.days);
  get("seconds_per_slot", c.seconds_per_slot);
  get("noise_std", c.noise_std);
  get("trip_tau", c.trip_tau);
  get("stress_day_fraction", c.stress_day_fraction);
  get("stress_factor", c.stress_factor);
  get("base_load_mean", c.base_load_mean);
  get("window_len", c.window_len);
  get("stride", c.stride);
  get("horizon", c.horizon);
  if (j.contains("k_pca")) c.k_pca = j.at("k_pca").get<long>();
  get("standardize", c.standardize);
  get("weights_mode", c.weights_mode);
  get("confidence_threshold", c.confidence_threshold);
  get("folds", c.folds);
  get("penetration", c.penetration);
  get("penetrations", c.penetrations);
  get("placements", c.placements);
  get("seed", c.seed);
  get("out_dir", c.out_dir);
  if (c.days < 1) throw Error("schema violation", "days: must be >= 1");
  if (c.folds < 2) throw Error("schema violation", "folds: must be >= 2");
  if (!(c.penetration > 0.0 && c.penetration <= 1.0))
    throw Error("schema violation", "penetration: must be in (0, 1]");
  if (c.weights_mode != "uniform" && c.weights_mode != "accuracy")
    throw Error("schema violation", "weights_mode: must be 'uniform' or 'accuracy'");
  return c;
}

// FNV-1a over the canonical config JSON; first 8 hex chars name artifacts.
// The output directory is excluded so the same run written elsewhere gets
// the same fingerprint.
inline std::string fingerprint(const RunConfig& cfg) {
  Json canonical = run_config_to_json(cfg);
  canonical.erase("out_dir");
  const std::string text = canonical.dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (char ch : text) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(ch));
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline LoadConfig load_config_of(const RunConfig& cfg) {
  LoadConfig lc;
  lc.seconds_per_slot = cfg.seconds_per_slot;
  lc.base_load_mean = cfg.base_load_mean;
  lc.stress_day_fraction = cfg.stress_day_fraction;
  lc.stress_factor = cfg.stress_factor;
  return lc;
}

inline SimConfig sim_config_of(const RunConfig& cfg) {
  SimConfig sc;
  sc.trip_tau = cfg.trip_tau;
  sc.noise_vm = cfg.noise_std;
  sc.noise_va = cfg.noise_std;
  sc.noise_p = cfg.noise_std;
  sc.noise_q = cfg.noise_std;
  return sc;
}

inline PipelineConfig pipeline_config_of(const RunConfig& cfg) {
  PipelineConfig pc;
  pc.k_pca = cfg.k_pca;
  pc.standardize = cfg.standardize;
  pc.weight_mode =
      cfg.weights_mode == "accuracy" ? WeightMode::Accuracy : WeightMode::Uniform;
  pc.confidence_threshold = cfg.confidence_threshold;
  return pc;
}

// `days` independent one-day traces, each with its own derived seed, so line
// trips on one day never bleed into the next.
inline std::vector<SimulationTrace> make_traces(const GridTopology& topo,
                                                const RunConfig& cfg,
                                                const SensorPlacement& placement,
                                                std::uint64_t seed) {
  std::vector<SimulationTrace> traces;
  const LoadConfig lc = load_config_of(cfg);
  const SimConfig sc = sim_config_of(cfg);
  for (int day = 0; day < cfg.days; ++day) {
    const std::uint64_t day_seed =
        derive_seed(seed, "trace", static_cast<std::uint64_t>(day));
    const LoadProfile loads = generate_loads(topo, 1, day_seed, lc);
    traces.push_back(simulate(topo, loads, placement, sc, day_seed));
  }
  return traces;
}

inline Dataset build_dataset(const GridTopology& topo, const RunConfig& cfg,
                             const SensorPlacement& placement,
                             std::uint64_t seed) {
  const auto traces = make_traces(topo, cfg, placement, seed);
  Dataset ds =
      assemble(traces, topo.candidate_lines, cfg.window_len, cfg.stride, cfg.horizon);
  ds.meta.source_seed = seed;
  if (ds.size() >= static_cast<std::size_t>(cfg.folds))
    split_folds(ds, cfg.folds, derive_seed(seed, "dataset/folds"));
  return ds;
}

inline EvalReport run_benchmark(const RunConfig& cfg) {
  const GridTopology topo = load_case(cfg.case_name);
  const SensorPlacement placement =
      place_sensors(topo, cfg.penetration, derive_seed(cfg.seed, "benchmark/placement"));
  const Dataset ds = build_dataset(topo, cfg, placement, derive_seed(cfg.seed, "benchmark/data"));
  EvalReport report =
      cross_validate(ds, pipeline_config_of(cfg), cfg.folds, derive_seed(cfg.seed, "benchmark/cv"));
  report.fingerprint = fingerprint(cfg);
  return report;
}

// For each penetration: `placements` independent sensor placements, a full
// simulate -> dataset -> cross-validate run per placement, fused MZE averaged.
// Placements yielding a single-class or too-small dataset are skipped with a
// recorded reason.
inline SweepResult penetration_sweep(const RunConfig& cfg) {
  if (cfg.penetrations.empty())
    throw Error("invalid argument", "empty penetration grid");
  if (cfg.placements < 1)
    throw Error("invalid argument", "placements must be >= 1");
  const GridTopology topo = load_case(cfg.case_name);
  const PipelineConfig pc = pipeline_config_of(cfg);
  SweepResult sweep;
  for (std::size_t pi = 0; pi < cfg.penetrations.size(); ++pi) {
    const double pen = cfg.penetrations[pi];
    double sum = 0.0;
    int used = 0;
    for (int pl = 0; pl < cfg.placements; ++pl) {
      const std::uint64_t idx = pi * 1000 + static_cast<std::uint64_t>(pl);
      const SensorPlacement placement =
          place_sensors(topo, pen, derive_seed(cfg.seed, "sweep/placement", idx));
      const Dataset ds =
          build_dataset(topo, cfg, placement, derive_seed(cfg.seed, "sweep/data", idx));
      auto skip = [&](const std::string& why) {
        sweep.skipped.push_back("penetration " + std::to_string(pen) +
                                " placement " + std::to_string(pl) + ": " + why);
      };
      if (ds.size() < static_cast<std::size_t>(cfg.folds)) {
        skip("dataset smaller than fold count");
        continue;
      }
      std::set<std::string> patterns;
      for (const auto& l : ds.labels) patterns.insert(l.pattern());
      if (patterns.size() < 2) {
        skip("single-class dataset");
        continue;
      }
      const EvalReport report =
          cross_validate(ds, pc, cfg.folds, derive_seed(cfg.seed, "sweep/cv", idx));
      sum += report.fused_mean_mze;
      ++used;
    }
    if (used == 0)
      throw Error("degenerate sweep",
                  "every placement skipped at penetration " + std::to_string(pen));
    sweep.points.push_back({pen, sum / used, used});
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// Train-once bundle for the forecast command.

struct ModelBundle {
  Standardizer standardizer;
  bool standardize = true;
  PcaModel pca;
  std::vector<ClassifierModel> classifiers;
  std::vector<double> weights;
  PatternCodec codec;
  double confidence_threshold = 0.5;
  std::string fingerprint;
};

inline ModelBundle train_bundle(const Dataset& ds, const PipelineConfig& cfg,
                                std::uint64_t seed) {
  ModelBundle bundle;
  bundle.standardize = cfg.standardize;
  bundle.confidence_threshold = cfg.confidence_threshold;
  Matrix x = to_matrix(ds.features);
  if (cfg.standardize) {
    bundle.standardizer = fit_standardizer(x);
    x = bundle.standardizer.apply(x);
  } else {
    bundle.standardizer.mean = Vector::Zero(x.cols());
    bundle.standardizer.scale = Vector::Ones(x.cols());
  }
  const Eigen::Index k_eff = std::min(cfg.k_pca, std::min(x.rows(), x.cols()));
  bundle.pca = fit_pca(x, k_eff);
  const Matrix z = project(bundle.pca, x);

  bundle.codec = PatternCodec::from_labels(ds.labels);
  TrainingSet train;
  train.features = z;
  train.n_classes = bundle.codec.n_classes();
  for (const auto& l : ds.labels) train.labels.push_back(bundle.codec.encode(l));

  bundle.classifiers.push_back(fit_logistic(train, cfg.logistic));
  SvmConfig svm_cfg = cfg.svm;
  svm_cfg.seed = derive_seed(seed, "train/svm");
  bundle.classifiers.push_back(fit_svm(train, svm_cfg));
  bundle.classifiers.push_back(fit_tree(train, cfg.tree));
  KnnConfig knn_cfg = cfg.knn;
  knn_cfg.k = std::min(knn_cfg.k, static_cast<int>(train.features.rows()));
  bundle.classifiers.push_back(fit_knn(train, knn_cfg));
  bundle.classifiers.push_back(fit_gnb(train, /*allow_sparse=*/true));

  if (cfg.weight_mode == WeightMode::Accuracy) {
    std::vector<double> acc;
    for (const auto& model : bundle.classifiers) {
      std::vector<int> preds;
      for (Eigen::Index i = 0; i < z.rows(); ++i)
        preds.push_back(predict(model, z.row(i).transpose()));
      acc.push_back(1.0 - mze(preds, train.labels));
    }
    bundle.weights = accuracy_weights(acc);
  } else {
    bundle.weights = uniform_weights(bundle.classifiers.size());
  }
  return bundle;
}

// Bundle on disk: a directory of JSON files plus a manifest listing them.
inline void save_bundle(const ModelBundle& bundle,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  atomic_write(dir / "reducer.json",
               reducer_to_json(bundle.standardizer, bundle.pca).dump(2));
  Json manifest;
  manifest["version"] = 1;
  manifest["fingerprint"] = bundle.fingerprint;
  manifest["standardize"] = bundle.standardize;
  manifest["confidence_threshold"] = bundle.confidence_threshold;
  manifest["weights"] = bundle.weights;
  manifest["class_patterns"] = bundle.codec.patterns();
  manifest["reducer"] = "reducer.json";
  Json files = Json::array();
  for (const auto& model : bundle.classifiers) {
    const std::string name = std::string(kind_name(model.kind)) + ".json";
    atomic_write(dir / name, classifier_to_json(model).dump(2));
    files.push_back(name);
  }
  manifest["classifiers"] = files;
  atomic_write(dir / "manifest.json", manifest.dump(2));
}

inline ModelBundle load_bundle(const std::filesystem::path& dir) {
  const Json manifest = Json::parse(read_file(dir / "manifest.json"));
  ModelBundle bundle;
  bundle.fingerprint = manifest.at("fingerprint").get<std::string>();
  bundle.standardize = manifest.at("standardize").get<bool>();
  bundle.confidence_threshold = manifest.at("confidence_threshold").get<double>();
  bundle.weights = manifest.at("weights").get<std::vector<double>>();
  bundle.codec = PatternCodec::from_patterns(
      manifest.at("class_patterns").get<std::vector<std::string>>());
  auto [std_, pca] = reducer_from_json(
      Json::parse(read_file(dir / manifest.at("reducer").get<std::string>())));
  bundle.standardizer = std_;
  bundle.pca = pca;
  for (const auto& name : manifest.at("classifiers"))
    bundle.classifiers.push_back(classifier_from_json(
        Json::parse(read_file(dir / name.get<std::string>()))));
  return bundle;
}

struct Forecast {
  int fused_class = 0;
  LabelVector label;
  double confidence = 0.0;
  bool accepted = false;
};

inline Forecast forecast_window(const ModelBundle& bundle,
                                const std::vector<double>& features) {
  Matrix x(1, static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j)
    x(0, static_cast<Eigen::Index>(j)) = features[j];
  if (bundle.standardize) x = bundle.standardizer.apply(x);
  const Matrix z = project(bundle.pca, x);

  VotePanel panel;
  panel.n_classes = bundle.codec.n_classes();
  panel.weights = bundle.weights;
  panel.votes.push_back({});
  for (const auto& model : bundle.classifiers)
    panel.votes[0].push_back(predict(model, z.row(0).transpose()));
  const FusionResult fused = fuse_votes(panel);
  const ConfidenceReport conf =
      confidence_index(fused.dist, bundle.classifiers.size());
  const Decision d =
      decide(fused.fused[0], conf.confidence[0], bundle.confidence_threshold);
  return {d.fused_class, bundle.codec.decode(d.fused_class), d.confidence,
          d.accepted};
}

}  // namespace pef
