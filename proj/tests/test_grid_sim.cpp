#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>

#include "pef/grid.hpp"
#include "pef/load_profile.hpp"
#include "pef/power_flow.hpp"
#include "pef/simulate.hpp"

using namespace pef;

namespace {

GridTopology two_bus(double x = 0.1, double rating = 10.0) {
  GridTopology t;
  t.buses = {1, 2};
  t.lines = {{1, 1, 2, x, rating}};
  t.slack_bus = 2;
  t.candidate_lines = {1};
  return t;
}

GridTopology triangle(double rating12 = 10.0) {
  GridTopology t;
  t.buses = {1, 2, 3};
  t.lines = {{1, 1, 2, 0.1, rating12}, {2, 2, 3, 0.1, 10.0}, {3, 1, 3, 0.1, 10.0}};
  t.slack_bus = 3;
  t.candidate_lines = {1};
  return t;
}

LoadProfile constant_loads(const GridTopology& topo, std::vector<double> active,
                           std::size_t slots) {
  LoadProfile p;
  p.seconds_per_slot = 1;
  for (double a : active) {
    p.active.push_back(std::vector<double>(slots, a));
    p.reactive.push_back(std::vector<double>(slots, 0.3 * a));
  }
  return p;
}

SensorPlacement all_sensors(const GridTopology& topo) {
  SensorPlacement s;
  s.sensor_buses = topo.buses;
  s.penetration = 1.0;
  return s;
}

}  // namespace

TEST_CASE("load_case bundled fixtures") {
  const GridTopology ieee30 = load_case("ieee30");
  CHECK(ieee30.buses.size() == 30);
  CHECK(ieee30.candidate_lines.size() == 4);

  const GridTopology toy5 = load_case("toy5");
  CHECK(toy5.buses.size() == 5);
  CHECK(toy5.slack_bus == 1);
  CHECK_NOTHROW(validate_topology(toy5));
}

TEST_CASE("load_case error paths") {
  CHECK_THROWS_AS(load_case("no_such_case"), Error);

  const char* path = "bad_case.txt";
  {
    std::ofstream f(path);
    f << "BUS 1\nBUS 2\nLINE 1 1 99 0.1 1.0\nSLACK 1\n";
  }
  try {
    load_case(path);
    FAIL("expected malformed-file error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bus 99") != std::string::npos);
  }
  std::remove(path);

  // Disconnected graph.
  const char* path2 = "disconnected.txt";
  {
    std::ofstream f(path2);
    f << "BUS 1\nBUS 2\nBUS 3\nLINE 1 1 2 0.1 1.0\nSLACK 1\n";
  }
  CHECK_THROWS_AS(load_case(path2), Error);
  std::remove(path2);
}

TEST_CASE("parser reports line numbers") {
  std::istringstream bad("BUS 1\nLINE oops\n");
  try {
    parse_case(bad, "inline");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("inline:2") != std::string::npos);
  }
}

TEST_CASE("dc power flow hand-solved 2-bus case") {
  const GridTopology topo = two_bus();
  const auto sol = dc_power_flow(topo, {1.0, 0.0});
  CHECK(sol.angles[0] == Catch::Approx(0.1).margin(1e-12));
  CHECK(sol.angles[1] == 0.0);
  CHECK(sol.line_flows[0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("dc power flow zero injections") {
  const auto sol = dc_power_flow(triangle(), {0.0, 0.0, 0.0});
  for (double a : sol.angles) CHECK(a == 0.0);
  for (double f : sol.line_flows) CHECK(f == 0.0);
}

TEST_CASE("dc power flow hand-solved 3-bus triangle") {
  // Reduced susceptance matrix [[20,-10],[-10,20]], P = (1,-1).
  const auto sol = dc_power_flow(triangle(), {1.0, -1.0, 0.0});
  CHECK(sol.angles[0] == Catch::Approx(1.0 / 30.0).margin(1e-12));
  CHECK(sol.angles[1] == Catch::Approx(-1.0 / 30.0).margin(1e-12));
  CHECK(sol.line_flows[0] == Catch::Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("generate_loads determinism and diurnal shape") {
  const GridTopology topo = load_case("toy5");
  LoadConfig cfg;
  cfg.seconds_per_slot = 60;
  const LoadProfile a = generate_loads(topo, 1, 7, cfg);
  const LoadProfile b = generate_loads(topo, 1, 7, cfg);
  CHECK(a.active == b.active);
  CHECK(a.reactive == b.reactive);

  // Mean demand 14:00-20:00 beats 02:00-06:00 at every bus.
  const std::size_t per_hour = 60;
  for (std::size_t bus = 0; bus < topo.buses.size(); ++bus) {
    auto band_mean = [&](int h0, int h1) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t t = static_cast<std::size_t>(h0) * per_hour;
           t < static_cast<std::size_t>(h1) * per_hour; ++t, ++n)
        sum += a.active[bus][t];
      return sum / static_cast<double>(n);
    };
    CHECK(band_mean(14, 20) > band_mean(2, 6));
  }
  CHECK_THROWS_AS(generate_loads(topo, 0, 7), Error);
}

TEST_CASE("no stress days means no events on bundled cases") {
  for (const char* name : {"toy5", "ieee30"}) {
    const GridTopology topo = load_case(name);
    LoadConfig lc;
    lc.seconds_per_slot = 60;
    lc.stress_day_fraction = 0.0;
    const LoadProfile loads = generate_loads(topo, 1, 11, lc);
    SimConfig sc;
    const auto trace = simulate(topo, loads, all_sensors(topo), sc, 11);
    INFO(name);
    CHECK(trace.event_log.empty());
    CHECK(trace.n_slots == loads.length());
    CHECK_FALSE(trace.truncated);
  }
}

TEST_CASE("place_sensors counts and determinism") {
  const GridTopology ieee30 = load_case("ieee30");
  const auto p = place_sensors(ieee30, 0.20, 3);
  CHECK(p.sensor_buses.size() == 6);

  const GridTopology toy5 = load_case("toy5");
  CHECK(place_sensors(toy5, 0.05, 3).sensor_buses.size() == 1);

  const auto a = place_sensors(ieee30, 0.20, 99);
  const auto b = place_sensors(ieee30, 0.20, 99);
  CHECK(a.sensor_buses == b.sensor_buses);

  CHECK_THROWS_AS(place_sensors(toy5, 0.0, 1), Error);
  CHECK_THROWS_AS(place_sensors(toy5, 1.5, 1), Error);
}

TEST_CASE("constant overload trips after exactly tau slots") {
  // |flow| on line 1-2 is 1/3 with a 1.0 pu load at bus 1; rating 0.3.
  const GridTopology topo = triangle(0.3);
  const LoadProfile loads = constant_loads(topo, {1.0, 0.0, 0.0}, 50);
  SimConfig cfg;
  cfg.trip_tau = 5;
  const auto trace = simulate(topo, loads, all_sensors(topo), cfg, 1);
  REQUIRE(trace.event_log.size() == 1);
  CHECK(trace.event_log[0].line == 1);
  CHECK(trace.event_log[0].overload_start == 0);
  CHECK(trace.event_log[0].trip_time == 4);
  CHECK_FALSE(trace.truncated);
  CHECK(trace.n_slots == 50);
}

TEST_CASE("disconnecting trip truncates the trace") {
  const GridTopology topo = two_bus(0.1, 0.5);
  const LoadProfile loads = constant_loads(topo, {1.0, 0.0}, 50);
  SimConfig cfg;
  cfg.trip_tau = 3;
  const auto trace = simulate(topo, loads, all_sensors(topo), cfg, 1);
  CHECK(trace.truncated);
  CHECK(trace.n_slots == 3);
  REQUIRE(trace.event_log.size() == 1);
  CHECK(trace.event_log[0].trip_time == 2);
}

TEST_CASE("noiseless simulation is deterministic and physically consistent") {
  const GridTopology topo = load_case("toy5");
  LoadConfig lc;
  lc.seconds_per_slot = 600;  // 144 slots
  lc.stress_day_fraction = 1.0;
  const LoadProfile loads = generate_loads(topo, 1, 21, lc);
  SimConfig sc;
  sc.trip_tau = 3;
  const auto trace = simulate(topo, loads, all_sensors(topo), sc, 21);
  const auto again = simulate(topo, loads, all_sensors(topo), sc, 21);
  CHECK(trace.data == again.data);
  REQUIRE(trace.event_log.size() >= 1);

  // Replay: rebuild the active-line timeline and verify the recorded angles
  // solve the flow equations, injections balance, and each event is a run of
  // exactly tau overloaded slots ending at trip_time.
  std::vector<bool> active(topo.lines.size(), true);
  DcFlowSolver solver(topo, active);
  const std::size_t slack = topo.bus_index(topo.slack_bus);
  std::vector<std::size_t> run(topo.lines.size(), 0);
  for (std::size_t t = 0; t < trace.n_slots; ++t) {
    std::vector<double> inj(topo.buses.size());
    for (std::size_t b = 0; b < topo.buses.size(); ++b) inj[b] = -loads.active[b][t];
    inj[slack] = 0.0;
    inj[slack] = DcFlowSolver::slack_injection(topo, inj);
    double balance = 0.0;
    for (double v : inj) balance += v;
    CHECK(std::abs(balance) < 1e-8);

    const auto sol = solver.solve(inj);
    for (std::size_t b = 0; b < topo.buses.size(); ++b) {
      CHECK(trace.at(t, b, 1) == Catch::Approx(sol.angles[b]).margin(1e-8));
      CHECK(trace.at(t, b, 2) == Catch::Approx(inj[b]).margin(1e-12));
    }
    for (std::size_t li = 0; li < topo.lines.size(); ++li) {
      if (!active[li]) continue;
      const auto& l = topo.lines[li];
      CHECK(std::abs(sol.line_flows[li] * l.reactance -
                     (sol.angles[topo.bus_index(l.from)] -
                      sol.angles[topo.bus_index(l.to)])) < 1e-8);
      if (topo.is_candidate(l.id) && std::abs(sol.line_flows[li]) > l.flow_rating)
        ++run[li];
      else
        run[li] = 0;
    }
    bool refactor = false;
    for (const auto& ev : trace.event_log) {
      if (ev.trip_time != t) continue;
      const auto li = static_cast<std::size_t>(
          std::find_if(topo.lines.begin(), topo.lines.end(),
                       [&](const Line& l) { return l.id == ev.line; }) -
          topo.lines.begin());
      CHECK(run[li] == sc.trip_tau);
      CHECK(ev.overload_start == t - sc.trip_tau + 1);
      active[li] = false;
      run[li] = 0;
      refactor = true;
    }
    if (refactor) {
      if (!detail::connected(topo, &active)) {
        // A disconnecting trip must end the trace at this slot.
        CHECK(trace.truncated);
        CHECK(t == trace.n_slots - 1);
        break;
      }
      solver = DcFlowSolver(topo, active);
    }
  }
}

TEST_CASE("tripping a loaded line reroutes flow") {
  const GridTopology topo = triangle(0.3);
  const LoadProfile loads = constant_loads(topo, {1.0, 0.0, 0.0}, 20);
  SimConfig cfg;
  cfg.trip_tau = 5;
  const auto trace = simulate(topo, loads, all_sensors(topo), cfg, 1);
  REQUIRE(trace.event_log.size() == 1);
  // Post-trip the 1.0 pu at bus 1 flows entirely over line 1-3, so bus 1's
  // angle changes on the next slot.
  const std::size_t trip = trace.event_log[0].trip_time;
  CHECK(trace.at(trip, 0, 1) != trace.at(trip + 1, 0, 1));
}

TEST_CASE("trace CSV export shape") {
  const GridTopology topo = triangle();
  const LoadProfile loads = constant_loads(topo, {0.5, 0.2, 0.0}, 3);
  const auto trace = simulate(topo, loads, all_sensors(topo), SimConfig{}, 1);
  std::ostringstream out;
  write_trace_csv(trace, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "slot,bus,vm,va,p,q");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3 * 3);
}
