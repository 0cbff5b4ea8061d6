#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pef/error.hpp"

namespace pef {

using BusId = int;
using LineId = int;

struct Line {
  LineId id;
  BusId from;
  BusId to;
  double reactance;    // per-unit, > 0
  double flow_rating;  // per-unit, > 0
};

struct GridTopology {
  std::vector<BusId> buses;
  std::vector<Line> lines;
  BusId slack_bus = 0;
  std::vector<LineId> candidate_lines;  // lines eligible to trip, ordered

  std::size_t bus_index(BusId b) const {
    auto it = std::find(buses.begin(), buses.end(), b);
    if (it == buses.end()) throw Error("topology", "unknown bus " + std::to_string(b));
    return static_cast<std::size_t>(it - buses.begin());
  }

  const Line& line(LineId id) const {
    for (const auto& l : lines)
      if (l.id == id) return l;
    throw Error("topology", "unknown line " + std::to_string(id));
  }

  bool is_candidate(LineId id) const {
    return std::find(candidate_lines.begin(), candidate_lines.end(), id) !=
           candidate_lines.end();
  }
};

namespace detail {

// Connectivity over a subset of lines (by position); used both for topology
// validation and for post-trip checks in the simulator.
inline bool connected(const GridTopology& topo,
                      const std::vector<bool>* line_active = nullptr) {
  if (topo.buses.empty()) return false;
  const std::size_t n = topo.buses.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t li = 0; li < topo.lines.size(); ++li) {
    if (line_active && !(*line_active)[li]) continue;
    const auto a = topo.bus_index(topo.lines[li].from);
    const auto b = topo.bus_index(topo.lines[li].to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

}  // namespace detail

inline void validate_topology(const GridTopology& topo) {
  if (topo.buses.empty()) throw Error("topology", "no buses");
  std::set<BusId> bus_set(topo.buses.begin(), topo.buses.end());
  if (bus_set.size() != topo.buses.size())
    throw Error("topology", "duplicate bus ids");
  std::set<LineId> line_ids;
  for (const auto& l : topo.lines) {
    if (!line_ids.insert(l.id).second)
      throw Error("topology", "duplicate line id " + std::to_string(l.id));
    if (!bus_set.count(l.from))
      throw Error("topology", "line " + std::to_string(l.id) +
                                  " references unknown bus " + std::to_string(l.from));
    if (!bus_set.count(l.to))
      throw Error("topology", "line " + std::to_string(l.id) +
                                  " references unknown bus " + std::to_string(l.to));
    if (l.reactance <= 0.0)
      throw Error("topology", "line " + std::to_string(l.id) + " has nonpositive reactance");
    if (l.flow_rating <= 0.0)
      throw Error("topology", "line " + std::to_string(l.id) + " has nonpositive rating");
  }
  if (!bus_set.count(topo.slack_bus))
    throw Error("topology", "slack bus " + std::to_string(topo.slack_bus) + " is not a listed bus");
  std::set<LineId> cand_set;
  for (auto c : topo.candidate_lines) {
    if (!line_ids.count(c))
      throw Error("topology", "candidate line " + std::to_string(c) + " is not a listed line");
    if (!cand_set.insert(c).second)
      throw Error("topology", "duplicate candidate line " + std::to_string(c));
  }
  if (!detail::connected(topo)) throw Error("topology", "graph is disconnected");
}

// Plain-text case format, one record per line:
//   BUS <id>
//   LINE <id> <from> <to> <reactance_pu> <rating_pu>
//   SLACK <id>
//   CANDIDATE <line_id> [<line_id> ...]
// '#' starts a comment; blank lines are ignored.
inline GridTopology parse_case(std::istream& in, const std::string& origin) {
  GridTopology topo;
  bool have_slack = false;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    std::string tag;
    if (!(ss >> tag)) continue;
    auto fail = [&](const std::string& what) -> Error {
      return Error("malformed case", origin + ":" + std::to_string(lineno) + ": " + what);
    };
    if (tag == "BUS") {
      BusId b;
      if (!(ss >> b)) throw fail("BUS needs an integer id");
      topo.buses.push_back(b);
    } else if (tag == "LINE") {
      Line l;
      if (!(ss >> l.id >> l.from >> l.to >> l.reactance >> l.flow_rating))
        throw fail("LINE needs <id> <from> <to> <reactance> <rating>");
      topo.lines.push_back(l);
    } else if (tag == "SLACK") {
      if (!(ss >> topo.slack_bus)) throw fail("SLACK needs a bus id");
      have_slack = true;
    } else if (tag == "CANDIDATE") {
      LineId c;
      bool any = false;
      while (ss >> c) {
        topo.candidate_lines.push_back(c);
        any = true;
      }
      if (!any) throw fail("CANDIDATE needs at least one line id");
    } else {
      throw fail("unknown record '" + tag + "'");
    }
  }
  if (!have_slack) throw Error("malformed case", origin + ": missing SLACK record");
  try {
    validate_topology(topo);
  } catch (const Error& e) {
    throw Error("malformed case", origin + ": " + e.what());
  }
  return topo;
}

namespace cases {

inline const char* toy5() {
  // Hub-and-spoke with an asymmetric outer ring: bus 1 feeds each load bus
  // over its own low-reactance spoke, and the ring both keeps the grid
  // connected after any single trip and leaks a distinct fraction of each
  // bus's demand into every other spoke, so one sensor anywhere can tell the
  // stressed corners apart. Each candidate is the dominant feed of one bus.
  return R"(# toy5: 5-bus hub with an asymmetric outer ring
BUS 1
BUS 2
BUS 3
BUS 4
BUS 5
LINE 1 1 2 0.25 0.60
LINE 2 1 3 0.25 0.60
LINE 3 1 4 0.25 0.60
LINE 4 1 5 0.25 0.60
LINE 5 2 3 0.10 2.00
LINE 6 3 4 0.20 2.00
LINE 7 4 5 0.40 2.00
LINE 8 5 2 0.80 2.00
SLACK 1
CANDIDATE 1 2 3 4
)";
}

// IEEE 30-bus test system topology (buses and branch reactances); flow
// ratings are calibrated for the bundled synthetic benchmark.
inline const char* ieee30() {
  return R"(# ieee30: IEEE 30-bus transmission system
BUS 1
BUS 2
BUS 3
BUS 4
BUS 5
BUS 6
BUS 7
BUS 8
BUS 9
BUS 10
BUS 11
BUS 12
BUS 13
BUS 14
BUS 15
BUS 16
BUS 17
BUS 18
BUS 19
BUS 20
BUS 21
BUS 22
BUS 23
BUS 24
BUS 25
BUS 26
BUS 27
BUS 28
BUS 29
BUS 30
LINE 1 1 2 0.0575 9.00
LINE 2 1 3 0.1652 6.00
LINE 3 2 4 0.1737 4.00
LINE 4 3 4 0.0379 6.00
LINE 5 2 5 0.1983 3.00
LINE 6 2 6 0.1763 4.50
LINE 7 4 6 0.0414 4.50
LINE 8 5 7 0.1160 2.00
LINE 9 6 7 0.0820 2.50
LINE 10 6 8 0.0420 0.62
LINE 11 6 9 0.2080 2.50
LINE 12 6 10 0.5560 1.50
LINE 13 9 11 0.2080 1.00
LINE 14 9 10 0.1100 2.00
LINE 15 4 12 0.2560 2.50
LINE 16 12 13 0.1400 1.00
LINE 17 12 14 0.2559 0.40
LINE 18 12 15 0.1304 0.75
LINE 19 12 16 0.1987 1.00
LINE 20 14 15 0.1997 0.60
LINE 21 16 17 0.1923 1.00
LINE 22 15 18 0.2185 0.90
LINE 23 18 19 0.1292 0.80
LINE 24 19 20 0.0680 1.00
LINE 25 10 20 0.2090 1.20
LINE 26 10 17 0.0845 1.20
LINE 27 10 21 0.0749 0.52
LINE 28 10 22 0.1499 0.80
LINE 29 21 22 0.0236 0.80
LINE 30 15 23 0.2020 0.70
LINE 31 22 24 0.1790 0.80
LINE 32 23 24 0.2700 0.60
LINE 33 24 25 0.3292 0.60
LINE 34 25 26 0.3800 0.50
LINE 35 25 27 0.2087 0.80
LINE 36 28 27 0.3960 1.50
LINE 37 27 29 0.4153 0.70
LINE 38 27 30 0.6027 0.40
LINE 39 29 30 0.4533 0.50
LINE 40 8 28 0.2000 1.00
LINE 41 6 28 0.0599 1.50
SLACK 1
CANDIDATE 10 17 27 38
)";
}

}  // namespace cases

// Loads a bundled case ("toy5", "ieee30") or a case file at the given path.
inline GridTopology load_case(const std::string& name_or_path) {
  if (name_or_path == "toy5") {
    std::istringstream ss(cases::toy5());
    return parse_case(ss, "toy5");
  }
  if (name_or_path == "ieee30") {
    std::istringstream ss(cases::ieee30());
    return parse_case(ss, "ieee30");
  }
  std::ifstream f(name_or_path);
  if (!f)
    throw Error("unknown case", "'" + name_or_path +
                                    "' is not a bundled case name or a readable file");
  return parse_case(f, name_or_path);
}

}  // namespace pef
