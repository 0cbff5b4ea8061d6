#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "pef/error.hpp"
#include "pef/grid.hpp"
#include "pef/load_profile.hpp"
#include "pef/power_flow.hpp"
#include "pef/rng.hpp"

namespace pef {

struct SensorPlacement {
  std::vector<BusId> sensor_buses;  // sorted ascending
  double penetration = 0.0;
};

inline SensorPlacement place_sensors(const GridTopology& topo,
                                     double penetration, std::uint64_t seed) {
  if (!(penetration > 0.0 && penetration <= 1.0))
    throw Error("invalid argument", "penetration must be in (0, 1]");
  const std::size_t n = topo.buses.size();
  std::size_t count = static_cast<std::size_t>(
      std::llround(penetration * static_cast<double>(n)));
  count = std::max<std::size_t>(count, 1);
  Rng rng(derive_seed(seed, "placement"));
  auto indices = rng.sample_without_replacement(n, count);
  SensorPlacement placement;
  placement.penetration = penetration;
  for (auto i : indices) placement.sensor_buses.push_back(topo.buses[i]);
  std::sort(placement.sensor_buses.begin(), placement.sensor_buses.end());
  return placement;
}

struct EventRecord {
  LineId line;
  std::size_t overload_start;  // first slot of the consecutive overload run
  std::size_t trip_time;       // slot at which the run reached tau
};

// Channel order per sensor bus: vm, va, p, q.
inline constexpr int kChannelsPerSensor = 4;

struct SimulationTrace {
  std::vector<BusId> sensor_buses;  // sorted, defines feature column order
  // Row-major: data[slot * width + sensor_index * 4 + channel].
  std::vector<double> data;
  std::size_t n_slots = 0;
  std::vector<EventRecord> event_log;
  std::uint64_t seed = 0;
  int seconds_per_slot = 1;
  bool truncated = false;  // a trip disconnected the grid; trace ends early

  std::size_t width() const { return sensor_buses.size() * kChannelsPerSensor; }
  double at(std::size_t slot, std::size_t sensor, int channel) const {
    return data[slot * width() + sensor * kChannelsPerSensor +
                static_cast<std::size_t>(channel)];
  }
};

struct SimConfig {
  std::size_t trip_tau = 36;  // consecutive overloaded slots before a trip
  double noise_vm = 0.0;
  double noise_va = 0.0;
  double noise_p = 0.0;
  double noise_q = 0.0;
  double vm_response = 0.02;       // linear vm sensitivity to local injection
  double power_factor_ratio = 0.3;
};

// Quasi-steady-state simulation: one DC power-flow solve per slot over the
// current topology, a consecutive-slot overload counter per candidate line,
// and sensor measurements with additive Gaussian noise. Tripped lines stay
// out for the remainder of the trace.
inline SimulationTrace simulate(const GridTopology& topo,
                                const LoadProfile& loads,
                                const SensorPlacement& placement,
                                const SimConfig& cfg, std::uint64_t seed) {
  const std::size_t n = topo.buses.size();
  if (loads.active.size() != n)
    throw Error("invalid argument", "load profile bus count != topology bus count");
  const std::size_t total = loads.length();
  const std::size_t slack_idx = topo.bus_index(topo.slack_bus);

  std::vector<std::size_t> sensor_idx;
  for (BusId b : placement.sensor_buses) sensor_idx.push_back(topo.bus_index(b));

  SimulationTrace trace;
  trace.sensor_buses = placement.sensor_buses;
  trace.seed = seed;
  trace.seconds_per_slot = loads.seconds_per_slot;
  trace.data.reserve(total * trace.width());

  std::vector<bool> line_active(topo.lines.size(), true);
  DcFlowSolver solver(topo, line_active);
  std::vector<std::size_t> overload_run(topo.lines.size(), 0);

  Rng noise(derive_seed(seed, "sim/noise"));
  std::vector<double> injections(n);

  for (std::size_t t = 0; t < total; ++t) {
    for (std::size_t b = 0; b < n; ++b) injections[b] = -loads.active[b][t];
    injections[slack_idx] = 0.0;
    injections[slack_idx] = DcFlowSolver::slack_injection(topo, injections);

    const DcFlowSolution sol = solver.solve(injections);

    for (std::size_t s = 0; s < sensor_idx.size(); ++s) {
      const std::size_t b = sensor_idx[s];
      const double p = injections[b];
      const double vm = 1.0 + cfg.vm_response * p + cfg.noise_vm * noise.normal();
      const double va = sol.angles[b] + cfg.noise_va * noise.normal();
      const double pm = p + cfg.noise_p * noise.normal();
      const double q = cfg.power_factor_ratio * p + cfg.noise_q * noise.normal();
      trace.data.push_back(vm);
      trace.data.push_back(va);
      trace.data.push_back(pm);
      trace.data.push_back(q);
    }
    trace.n_slots = t + 1;

    // Trips happen at slot end; the measurements above saw the pre-trip grid.
    std::vector<std::size_t> tripping;
    for (std::size_t li = 0; li < topo.lines.size(); ++li) {
      if (!line_active[li] || !topo.is_candidate(topo.lines[li].id)) continue;
      if (std::abs(sol.line_flows[li]) > topo.lines[li].flow_rating) {
        if (++overload_run[li] == cfg.trip_tau) tripping.push_back(li);
      } else {
        overload_run[li] = 0;
      }
    }
    if (!tripping.empty()) {
      for (auto li : tripping) {
        line_active[li] = false;
        trace.event_log.push_back({topo.lines[li].id, t - cfg.trip_tau + 1, t});
        overload_run[li] = 0;
      }
      if (!detail::connected(topo, &line_active)) {
        trace.truncated = true;
        return trace;
      }
      solver = DcFlowSolver(topo, line_active);
    }
  }
  return trace;
}

// CSV export: header `slot,bus,vm,va,p,q`, one row per sensor bus per slot.
inline void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
  out << "slot,bus,vm,va,p,q\n";
  char buf[160];
  for (std::size_t t = 0; t < trace.n_slots; ++t) {
    for (std::size_t s = 0; s < trace.sensor_buses.size(); ++s) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%.17g,%.17g,%.17g,%.17g\n", t,
                    trace.sensor_buses[s], trace.at(t, s, 0), trace.at(t, s, 1),
                    trace.at(t, s, 2), trace.at(t, s, 3));
      out << buf;
    }
  }
}

}  // namespace pef
