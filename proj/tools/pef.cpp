// pef: power-event-forecasting pipeline front end.
//
// Subcommands: simulate, dataset, train, evaluate, sweep, forecast.
// All randomness flows from --seed; artifacts are written atomically and
// named <out>/<command>-<fingerprint8>.<ext> so reruns never silently
// overwrite a different configuration's output.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "pef/pipeline.hpp"

namespace fs = std::filesystem;
using pef::Json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  std::string case_name;
  double penetration = -1.0;
  std::int64_t folds = -1;
  std::int64_t days = -1;
  std::int64_t window_len = -1;
  std::int64_t stride = -1;
  std::int64_t horizon = -1;
  std::int64_t k_pca = -1;
  std::int64_t placements = -1;
  double threshold = -1.0;
  std::string weights_mode;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--case", args.case_name, "bundled case name or case file path");
  cmd->add_option("--penetration", args.penetration, "sensor penetration in (0,1]");
  cmd->add_option("--folds", args.folds, "cross-validation folds");
  cmd->add_option("--days", args.days, "number of simulated one-day traces");
  cmd->add_option("--window-len", args.window_len, "moving window length A");
  cmd->add_option("--stride", args.stride, "window stride");
  cmd->add_option("--horizon", args.horizon, "forecast horizon in slots");
  cmd->add_option("--k-pca", args.k_pca, "retained principal components");
  cmd->add_option("--placements", args.placements, "placements per sweep point");
  cmd->add_option("--threshold", args.threshold, "confidence threshold");
  cmd->add_option("--weights-mode", args.weights_mode, "uniform or accuracy");
}

// Config file first, then flag overrides.
pef::RunConfig resolve_config(const CommonArgs& args) {
  pef::RunConfig cfg;
  if (!args.config_path.empty())
    cfg = pef::run_config_from_json(Json::parse(pef::read_file(args.config_path)));
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (!args.case_name.empty()) cfg.case_name = args.case_name;
  if (args.penetration > 0.0) cfg.penetration = args.penetration;
  if (args.folds > 0) cfg.folds = static_cast<int>(args.folds);
  if (args.days > 0) cfg.days = static_cast<int>(args.days);
  if (args.window_len > 0) cfg.window_len = static_cast<std::size_t>(args.window_len);
  if (args.stride > 0) cfg.stride = static_cast<std::size_t>(args.stride);
  if (args.horizon >= 0) cfg.horizon = static_cast<std::size_t>(args.horizon);
  if (args.k_pca > 0) cfg.k_pca = args.k_pca;
  if (args.placements > 0) cfg.placements = static_cast<int>(args.placements);
  if (args.threshold >= 0.0) cfg.confidence_threshold = args.threshold;
  if (!args.weights_mode.empty()) cfg.weights_mode = args.weights_mode;
  // Re-validate after overrides.
  return pef::run_config_from_json(pef::run_config_to_json(cfg));
}

fs::path artifact_path(const pef::RunConfig& cfg, const std::string& command,
                       const std::string& ext) {
  return fs::path(cfg.out_dir) /
         (command + "-" + pef::fingerprint(cfg).substr(0, 8) + "." + ext);
}

int cmd_simulate(const CommonArgs& args) {
  const pef::RunConfig cfg = resolve_config(args);
  const pef::GridTopology topo = pef::load_case(cfg.case_name);
  const pef::SensorPlacement placement = pef::place_sensors(
      topo, cfg.penetration, pef::derive_seed(cfg.seed, "benchmark/placement"));
  const auto traces =
      pef::make_traces(topo, cfg, placement, pef::derive_seed(cfg.seed, "benchmark/data"));

  std::ostringstream csv;
  csv << "# fingerprint: " << pef::fingerprint(cfg) << "\n";
  Json events = Json::array();
  std::size_t slot_offset = 0;
  bool first = true;
  for (const auto& trace : traces) {
    std::ostringstream one;
    pef::write_trace_csv(trace, one);
    std::string body = one.str();
    if (!first) body.erase(0, body.find('\n') + 1);  // keep a single header
    first = false;
    csv << body;
    for (const auto& e : trace.event_log)
      events.push_back({{"line", e.line},
                        {"overload_start", e.overload_start + slot_offset},
                        {"trip_time", e.trip_time + slot_offset}});
    slot_offset += trace.n_slots;
  }
  const fs::path csv_path = artifact_path(cfg, "simulate", "csv");
  const fs::path json_path = artifact_path(cfg, "simulate-events", "json");
  pef::atomic_write(csv_path, csv.str());
  Json out;
  out["fingerprint"] = pef::fingerprint(cfg);
  out["events"] = events;
  pef::atomic_write(json_path, out.dump(2) + "\n");
  std::cout << csv_path.string() << "\n" << json_path.string() << "\n";
  return 0;
}

int cmd_dataset(const CommonArgs& args) {
  const pef::RunConfig cfg = resolve_config(args);
  const pef::GridTopology topo = pef::load_case(cfg.case_name);
  const pef::SensorPlacement placement = pef::place_sensors(
      topo, cfg.penetration, pef::derive_seed(cfg.seed, "benchmark/placement"));
  pef::Dataset ds = pef::build_dataset(topo, cfg, placement,
                                       pef::derive_seed(cfg.seed, "benchmark/data"));
  ds.meta.config_fingerprint = pef::fingerprint(cfg);
  const fs::path csv_path = artifact_path(cfg, "dataset", "csv");
  const fs::path meta_path = artifact_path(cfg, "dataset-meta", "json");
  pef::atomic_write(csv_path, pef::dataset_to_csv(ds));
  pef::atomic_write(meta_path, pef::dataset_meta_to_json(ds).dump(2) + "\n");
  if (ds.size() == 0)
    std::cout << "warning: empty dataset (trace shorter than window + horizon)\n";
  std::cout << csv_path.string() << "\n" << meta_path.string() << "\n";
  return 0;
}

// dataset-<fp>.csv pairs with dataset-meta-<fp>.json; any other name pairs
// with <stem>-meta.json next to it.
pef::Dataset load_dataset(const std::string& csv_path) {
  const fs::path csv(csv_path);
  const std::string stem = csv.stem().string();
  fs::path meta_path;
  if (stem.rfind("dataset-", 0) == 0)
    meta_path = csv.parent_path() / ("dataset-meta-" + stem.substr(8) + ".json");
  else
    meta_path = csv.parent_path() / (stem + "-meta.json");
  const Json meta = Json::parse(pef::read_file(meta_path));
  return pef::dataset_from_csv(pef::read_file(csv_path), meta);
}

int cmd_train(const CommonArgs& args, const std::string& dataset_path) {
  const pef::RunConfig cfg = resolve_config(args);
  pef::Dataset ds = load_dataset(dataset_path);
  pef::ModelBundle bundle = pef::train_bundle(
      ds, pef::pipeline_config_of(cfg), pef::derive_seed(cfg.seed, "train"));
  bundle.fingerprint = ds.meta.config_fingerprint.empty()
                           ? pef::fingerprint(cfg)
                           : ds.meta.config_fingerprint;
  const fs::path dir =
      fs::path(cfg.out_dir) / ("bundle-" + pef::fingerprint(cfg).substr(0, 8));
  pef::save_bundle(bundle, dir);
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& dataset_path) {
  const pef::RunConfig cfg = resolve_config(args);
  pef::Dataset ds = load_dataset(dataset_path);
  pef::EvalReport report =
      pef::cross_validate(ds, pef::pipeline_config_of(cfg), cfg.folds,
                          pef::derive_seed(cfg.seed, "benchmark/cv"));
  report.fingerprint = pef::fingerprint(cfg);
  const fs::path json_path = artifact_path(cfg, "evaluate", "json");
  const fs::path txt_path = artifact_path(cfg, "evaluate", "txt");
  pef::atomic_write(json_path, pef::eval_report_to_json(report).dump(2) + "\n");
  pef::atomic_write(txt_path, pef::render_table({cfg.case_name}, {report}));
  std::cout << pef::render_table({cfg.case_name}, {report});
  std::cout << json_path.string() << "\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  const pef::RunConfig cfg = resolve_config(args);
  const pef::SweepResult sweep = pef::penetration_sweep(cfg);
  Json out = pef::sweep_to_json(sweep);
  out["fingerprint"] = pef::fingerprint(cfg);
  const fs::path csv_path = artifact_path(cfg, "sweep", "csv");
  const fs::path json_path = artifact_path(cfg, "sweep", "json");
  pef::atomic_write(csv_path, pef::sweep_to_csv(sweep));
  pef::atomic_write(json_path, out.dump(2) + "\n");
  std::cout << csv_path.string() << "\n" << json_path.string() << "\n";
  return 0;
}

int cmd_forecast(const CommonArgs& args, const std::string& bundle_path,
                 const std::string& window_csv, const std::string& meta_path) {
  const pef::RunConfig cfg = resolve_config(args);
  const pef::ModelBundle bundle = pef::load_bundle(bundle_path);
  if (!meta_path.empty()) {
    const Json meta = Json::parse(pef::read_file(meta_path));
    if (meta.contains("fingerprint") && !bundle.fingerprint.empty() &&
        meta.at("fingerprint").get<std::string>() != bundle.fingerprint)
      throw pef::Error("fingerprint mismatch",
                       "model bundle and dataset metadata come from different configs");
  }
  // One window per row, A*B comma-separated features.
  std::istringstream in(pef::read_file(window_csv));
  std::string line;
  Json per_window = Json::array();
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> features;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) features.push_back(std::stod(cell));
    const std::size_t expect = static_cast<std::size_t>(bundle.pca.d);
    if (features.size() == expect + bundle.codec.patterns().front().size())
      features.resize(expect);  // dataset CSV rows carry trailing label bits
    if (features.size() != expect)
      throw pef::Error("schema violation",
                       "window row " + std::to_string(lineno) + ": expected " +
                           std::to_string(expect) + " features, got " +
                           std::to_string(features.size()));
    const pef::Forecast f = pef::forecast_window(bundle, features);
    per_window.push_back({{"fused_class", f.fused_class},
                          {"label", f.label.pattern()},
                          {"confidence", f.confidence},
                          {"accepted", f.accepted}});
  }
  Json out;
  out["fingerprint"] = bundle.fingerprint;
  out["windows"] = per_window;
  const fs::path json_path = artifact_path(cfg, "forecast", "json");
  pef::atomic_write(json_path, out.dump(2) + "\n");
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"power-system event forecasting pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string dataset_path, bundle_path, window_csv, meta_path;

  auto* simulate = app.add_subcommand("simulate", "simulate traces, write CSV + event log");
  add_common(simulate, args);
  auto* dataset = app.add_subcommand("dataset", "build a windowed dataset");
  add_common(dataset, args);
  auto* train = app.add_subcommand("train", "fit PCA + classifiers on a dataset");
  add_common(train, args);
  train->add_option("dataset", dataset_path, "dataset CSV path")->required();
  auto* evaluate = app.add_subcommand("evaluate", "cross-validate a dataset");
  add_common(evaluate, args);
  evaluate->add_option("dataset", dataset_path, "dataset CSV path")->required();
  auto* sweep = app.add_subcommand("sweep", "penetration sweep");
  add_common(sweep, args);
  auto* forecast = app.add_subcommand("forecast", "forecast windows with a trained bundle");
  add_common(forecast, args);
  forecast->add_option("bundle", bundle_path, "model bundle directory")->required();
  forecast->add_option("windows", window_csv, "window CSV path")->required();
  forecast->add_option("--dataset-meta", meta_path, "dataset metadata for fingerprint check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (dataset->parsed()) return cmd_dataset(args);
    if (train->parsed()) return cmd_train(args, dataset_path);
    if (evaluate->parsed()) return cmd_evaluate(args, dataset_path);
    if (sweep->parsed()) return cmd_sweep(args);
    if (forecast->parsed()) return cmd_forecast(args, bundle_path, window_csv, meta_path);
  } catch (const pef::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
