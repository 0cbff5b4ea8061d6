#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pef/error.hpp"
#include "pef/rng.hpp"
#include "pef/simulate.hpp"

namespace pef {

// One-/multi-hot contingency label: bit 0 = normal, bit c = trip of the c-th
// candidate line within the forecast horizon.
struct LabelVector {
  std::vector<std::uint8_t> bits;  // length C + 1

  static LabelVector normal(std::size_t n_candidates) {
    LabelVector v;
    v.bits.assign(n_candidates + 1, 0);
    v.bits[0] = 1;
    return v;
  }

  bool is_normal() const { return bits[0] == 1; }

  std::string pattern() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) s[i] = '1';
    return s;
  }

  void validate() const {
    std::size_t events = 0;
    for (std::size_t i = 1; i < bits.size(); ++i) events += bits[i];
    if (bits[0] == 1 && events > 0)
      throw Error("label invariant", "normal bit set alongside event bits");
    if (bits[0] == 0 && events == 0)
      throw Error("label invariant", "no bit set");
  }

  bool operator==(const LabelVector& o) const { return bits == o.bits; }
};

struct MeasurementWindow {
  std::vector<double> data;  // A x B, row-major (slot-major)
  std::size_t n_slots = 0;   // A
  std::size_t n_features = 0;  // B
  std::size_t start_slot = 0;
  // Feature column order: (bus, channel) with channels vm=0, va=1, p=2, q=3.
  std::vector<std::pair<BusId, int>> feature_order;
};

inline std::vector<std::pair<BusId, int>> feature_order_for(
    const std::vector<BusId>& sensor_buses) {
  std::vector<std::pair<BusId, int>> order;
  for (BusId b : sensor_buses)
    for (int c = 0; c < kChannelsPerSensor; ++c) order.emplace_back(b, c);
  return order;
}

struct SegmentResult {
  std::vector<MeasurementWindow> windows;
  bool too_short = false;  // trace shorter than A + horizon
};

// Moving-window segmentation. Pre-event data only: a window whose slot range
// covers a trip instant is dropped. A window is emitted only when its full
// label horizon fits inside the trace.
inline SegmentResult segment(const SimulationTrace& trace, std::size_t window_len,
                             std::size_t stride, std::size_t horizon) {
  if (window_len < 1) throw Error("invalid argument", "window length must be >= 1");
  if (stride < 1) throw Error("invalid argument", "stride must be >= 1");
  SegmentResult result;
  if (trace.n_slots < window_len + horizon) {
    result.too_short = true;
    return result;
  }
  const std::size_t last_start = trace.n_slots - window_len - horizon;
  const std::size_t width = trace.width();
  for (std::size_t start = 0; start <= last_start; start += stride) {
    bool overlaps_trip = false;
    for (const auto& ev : trace.event_log) {
      if (ev.trip_time >= start && ev.trip_time < start + window_len) {
        overlaps_trip = true;
        break;
      }
    }
    if (overlaps_trip) continue;
    MeasurementWindow w;
    w.start_slot = start;
    w.n_slots = window_len;
    w.n_features = width;
    w.feature_order = feature_order_for(trace.sensor_buses);
    w.data.assign(trace.data.begin() + static_cast<std::ptrdiff_t>(start * width),
                  trace.data.begin() +
                      static_cast<std::ptrdiff_t>((start + window_len) * width));
    result.windows.push_back(std::move(w));
  }
  return result;
}

// Label = candidate lines tripping in (window_end, window_end + horizon].
inline LabelVector label_window(const MeasurementWindow& window,
                                const std::vector<EventRecord>& events,
                                std::size_t horizon,
                                const std::vector<LineId>& candidate_lines) {
  LabelVector label = LabelVector::normal(candidate_lines.size());
  const std::size_t window_end = window.start_slot + window.n_slots - 1;
  for (const auto& ev : events) {
    if (ev.trip_time > window_end && ev.trip_time <= window_end + horizon) {
      auto it = std::find(candidate_lines.begin(), candidate_lines.end(), ev.line);
      if (it == candidate_lines.end())
        throw Error("label invariant", "event on non-candidate line " +
                                           std::to_string(ev.line));
      const auto c = static_cast<std::size_t>(it - candidate_lines.begin());
      label.bits[c + 1] = 1;
      label.bits[0] = 0;
    }
  }
  return label;
}

struct DatasetMeta {
  std::size_t window_len = 0;   // A
  std::size_t n_features = 0;   // B
  std::size_t n_candidates = 0; // C
  std::size_t horizon = 0;
  std::size_t stride = 0;
  std::uint64_t source_seed = 0;
  std::vector<std::pair<BusId, int>> feature_order;
  std::string config_fingerprint;  // set when built through the CLI
};

struct Dataset {
  std::vector<std::vector<double>> features;  // each of length A*B
  std::vector<LabelVector> labels;
  std::vector<int> folds;  // fold id per sample, -1 before split_folds
  DatasetMeta meta;

  std::size_t size() const { return features.size(); }
};

// Segments and labels every trace, then concatenates into one supervised
// dataset. All traces must share the sensor placement.
inline Dataset assemble(const std::vector<SimulationTrace>& traces,
                        const std::vector<LineId>& candidate_lines,
                        std::size_t window_len, std::size_t stride,
                        std::size_t horizon) {
  if (traces.empty()) throw Error("invalid argument", "no traces to assemble");
  Dataset ds;
  ds.meta.window_len = window_len;
  ds.meta.stride = stride;
  ds.meta.horizon = horizon;
  ds.meta.n_candidates = candidate_lines.size();
  ds.meta.n_features = traces.front().width();
  ds.meta.source_seed = traces.front().seed;
  ds.meta.feature_order = feature_order_for(traces.front().sensor_buses);
  for (const auto& trace : traces) {
    if (trace.sensor_buses != traces.front().sensor_buses)
      throw Error("invalid argument", "traces have inconsistent sensor placements");
    auto seg = segment(trace, window_len, stride, horizon);
    for (auto& w : seg.windows) {
      LabelVector label = label_window(w, trace.event_log, horizon, candidate_lines);
      label.validate();
      ds.features.push_back(std::move(w.data));
      ds.labels.push_back(std::move(label));
    }
  }
  ds.folds.assign(ds.size(), -1);
  return ds;
}

// Stratified k-fold assignment: samples are grouped by label pattern and
// dealt round-robin through a global fold counter, so fold sizes differ by
// at most one and each pattern spreads across folds.
inline void split_folds(Dataset& dataset, int k, std::uint64_t seed) {
  if (k < 2) throw Error("invalid argument", "fold count must be >= 2");
  if (dataset.size() < static_cast<std::size_t>(k))
    throw Error("invalid argument", "fewer samples than folds");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    groups[dataset.labels[i].pattern()].push_back(i);

  std::vector<std::pair<std::string, std::vector<std::size_t>>> ordered(
      groups.begin(), groups.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) {
                     return a.second.size() > b.second.size();
                   });

  Rng rng(derive_seed(seed, "folds"));
  int next_fold = 0;
  for (auto& [pattern, members] : ordered) {
    rng.shuffle(members);
    for (auto idx : members) {
      dataset.folds[idx] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
}

}  // namespace pef
