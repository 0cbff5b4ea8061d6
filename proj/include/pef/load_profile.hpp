#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pef/error.hpp"
#include "pef/grid.hpp"
#include "pef/rng.hpp"

namespace pef {

struct LoadProfile {
  // Per-bus time series in topology bus order, all the same length.
  std::vector<std::vector<double>> active;    // pu demand, >= 0
  std::vector<std::vector<double>> reactive;  // pu demand, >= 0
  int seconds_per_slot = 1;

  std::size_t length() const { return active.empty() ? 0 : active.front().size(); }
};

struct LoadConfig {
  int seconds_per_slot = 1;
  double base_load_mean = 0.08;   // pu, mean per-bus demand scale
  double base_load_sigma = 0.02;  // log-normal sigma of per-bus scale
  double diurnal_depth = 0.20;    // peak-to-mean swing of the daily shape
  double noise_std = 0.02;        // relative slot-level noise
  double power_factor_ratio = 0.3;  // reactive demand as fraction of active
  double stress_day_fraction = 0.0;
  double stress_factor = 16.0;     // peak multiplier at stressed buses
  double multi_trip_fraction = 0.15;  // stress days targeting two lines at once
  double episode_hours = 4.0;      // stress bump duration
};

// Daily shape peaking at 17:00, matching the afternoon consumption bulge.
inline double diurnal_shape(double hour_of_day, double depth) {
  return 1.0 + depth * std::cos(2.0 * 3.141592653589793 * (hour_of_day - 17.0) / 24.0);
}

namespace detail {

// Hop distance from the slack bus to every bus (BFS).
inline std::vector<int> slack_distances(const GridTopology& topo) {
  const std::size_t n = topo.buses.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& l : topo.lines) {
    const auto a = topo.bus_index(l.from);
    const auto b = topo.bus_index(l.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> dist(n, -1);
  std::vector<std::size_t> queue{topo.bus_index(topo.slack_bus)};
  dist[queue[0]] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto u = queue[head];
    for (auto v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

// The endpoint of a line that is electrically farther from the slack; demand
// added there must flow in over the line, loading it. Ties break to the
// higher bus id.
inline BusId far_endpoint(const GridTopology& topo, const Line& line,
                          const std::vector<int>& dist) {
  const int df = dist[topo.bus_index(line.from)];
  const int dt = dist[topo.bus_index(line.to)];
  if (df != dt) return df > dt ? line.from : line.to;
  return std::max(line.from, line.to);
}

}  // namespace detail

// Synthesizes a diurnal per-bus demand profile. On stress days the bus at the
// far end of one (occasionally two) candidate lines gets a smooth
// raised-cosine demand bump in the afternoon peak, strong enough to overload
// that line in the subsequent simulation.
inline LoadProfile generate_loads(const GridTopology& topo, int days,
                                  std::uint64_t seed,
                                  const LoadConfig& cfg = {}) {
  if (days < 1) throw Error("invalid argument", "days must be >= 1");
  const std::size_t n = topo.buses.size();
  const std::size_t slots_per_day =
      static_cast<std::size_t>(86400 / cfg.seconds_per_slot);
  const std::size_t total = slots_per_day * static_cast<std::size_t>(days);

  Rng scale_rng(derive_seed(seed, "load/scale"));
  std::vector<double> bus_scale(n);
  for (std::size_t b = 0; b < n; ++b)
    bus_scale[b] = cfg.base_load_mean *
                   std::exp(cfg.base_load_sigma * scale_rng.normal());

  // Per-slot stress multiplier, per bus.
  std::vector<std::vector<double>> stress(n, std::vector<double>(total, 1.0));
  const std::vector<int> dist = detail::slack_distances(topo);
  Rng stress_rng(derive_seed(seed, "load/stress"));
  for (int d = 0; d < days; ++d) {
    if (stress_rng.uniform() >= cfg.stress_day_fraction) continue;
    std::size_t n_targets = 1;
    if (topo.candidate_lines.size() >= 2 &&
        stress_rng.uniform() < cfg.multi_trip_fraction)
      n_targets = 2;
    auto picks = stress_rng.sample_without_replacement(
        topo.candidate_lines.size(), n_targets);
    const double start_hour = stress_rng.uniform(14.2, 19.8 - cfg.episode_hours);
    const std::size_t day0 = static_cast<std::size_t>(d) * slots_per_day;
    const std::size_t ep_start =
        day0 + static_cast<std::size_t>(start_hour * 3600.0 / cfg.seconds_per_slot);
    const std::size_t ep_len =
        static_cast<std::size_t>(cfg.episode_hours * 3600.0 / cfg.seconds_per_slot);
    for (auto pick : picks) {
      const Line& target = topo.line(topo.candidate_lines[pick]);
      auto& row = stress[topo.bus_index(detail::far_endpoint(topo, target, dist))];
      for (std::size_t t = ep_start; t < ep_start + ep_len && t < total; ++t) {
        const double phase = static_cast<double>(t - ep_start) / static_cast<double>(ep_len);
        // Trapezoid: cosine ramps over the first and last tenth of the
        // episode with a flat plateau in between, so the overload level is
        // sustained rather than grazed.
        const double ramp = 0.1;
        double bump = 1.0;
        if (phase < ramp)
          bump = 0.5 * (1.0 - std::cos(3.141592653589793 * phase / ramp));
        else if (phase > 1.0 - ramp)
          bump = 0.5 * (1.0 - std::cos(3.141592653589793 * (1.0 - phase) / ramp));
        row[t] = std::max(row[t], 1.0 + (cfg.stress_factor - 1.0) * bump);
      }
    }
  }

  Rng noise_rng(derive_seed(seed, "load/noise"));
  LoadProfile profile;
  profile.seconds_per_slot = cfg.seconds_per_slot;
  profile.active.assign(n, std::vector<double>(total));
  profile.reactive.assign(n, std::vector<double>(total));
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t t = 0; t < total; ++t) {
      const double hour =
          std::fmod(static_cast<double>(t) * cfg.seconds_per_slot / 3600.0, 24.0);
      double p = bus_scale[b] * diurnal_shape(hour, cfg.diurnal_depth) *
                 (1.0 + cfg.noise_std * noise_rng.normal()) * stress[b][t];
      p = std::max(p, 0.0);
      profile.active[b][t] = p;
      profile.reactive[b][t] = cfg.power_factor_ratio * p;
    }
  }
  return profile;
}

}  // namespace pef
