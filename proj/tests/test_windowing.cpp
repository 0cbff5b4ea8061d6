#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "pef/windowing.hpp"

using namespace pef;

namespace {

// A synthetic trace with 1 sensor bus and a chosen event log; data values
// encode (slot, feature) so flattening can be checked exactly.
SimulationTrace make_trace(std::size_t n_slots,
                           std::vector<EventRecord> events = {}) {
  SimulationTrace t;
  t.sensor_buses = {7};
  t.n_slots = n_slots;
  t.event_log = std::move(events);
  t.seed = 5;
  for (std::size_t slot = 0; slot < n_slots; ++slot)
    for (int c = 0; c < kChannelsPerSensor; ++c)
      t.data.push_back(static_cast<double>(slot) * 10.0 + c);
  return t;
}

}  // namespace

TEST_CASE("segment window starts and count formula") {
  const auto trace = make_trace(200);
  const auto result = segment(trace, 166, 10, 10);
  REQUIRE(result.windows.size() == 3);
  CHECK(result.windows[0].start_slot == 0);
  CHECK(result.windows[1].start_slot == 10);
  CHECK(result.windows[2].start_slot == 20);
  CHECK_FALSE(result.too_short);

  // Brute-force oracle over assorted (T, A, stride, horizon) combinations.
  for (std::size_t T : {50u, 83u, 166u}) {
    for (std::size_t A : {10u, 33u, 50u}) {
      for (std::size_t s : {1u, 7u}) {
        for (std::size_t h : {0u, 5u}) {
          const auto tr = make_trace(T);
          const auto got = segment(tr, A, s, h).windows.size();
          std::size_t expect = 0;
          for (std::size_t start = 0; start + A + h <= T; start += s) ++expect;
          INFO("T=" << T << " A=" << A << " s=" << s << " h=" << h);
          CHECK(got == expect);
        }
      }
    }
  }
}

TEST_CASE("segment boundary and too-short cases") {
  const auto exact = segment(make_trace(166), 166, 10, 0);
  CHECK(exact.windows.size() == 1);

  const auto short_trace = segment(make_trace(100), 166, 10, 10);
  CHECK(short_trace.windows.empty());
  CHECK(short_trace.too_short);
}

TEST_CASE("windows covering a trip slot are dropped") {
  // Trip at slot 25: windows starting at 0..25 with A=20 cover it when
  // start <= 25 < start+20, i.e. starts 6..25.
  const auto trace = make_trace(100, {{1, 20, 25}});
  const auto result = segment(trace, 20, 1, 0);
  std::set<std::size_t> starts;
  for (const auto& w : result.windows) starts.insert(w.start_slot);
  for (std::size_t s = 0; s <= 80; ++s) {
    const bool covers = s <= 25 && 25 < s + 20;
    CHECK(starts.count(s) == (covers ? 0u : 1u));
  }
}

TEST_CASE("label_window rules") {
  const std::vector<LineId> candidates = {11, 12, 13, 14};
  MeasurementWindow w;
  w.start_slot = 0;
  w.n_slots = 50;  // window_end = 49

  SECTION("no events in horizon -> normal") {
    const auto label = label_window(w, {}, 10, candidates);
    CHECK(label.pattern() == "10000");
  }
  SECTION("candidate 2 trips at window_end + 3") {
    const auto label = label_window(w, {{12, 50, 52}}, 10, candidates);
    CHECK(label.pattern() == "00100");
  }
  SECTION("simultaneous trips of candidates 1 and 3") {
    const auto label = label_window(w, {{11, 50, 55}, {13, 50, 55}}, 10, candidates);
    CHECK(label.pattern() == "01010");
  }
  SECTION("trip beyond horizon stays normal") {
    const auto label = label_window(w, {{11, 58, 60}}, 10, candidates);
    CHECK(label.pattern() == "10000");
  }
  SECTION("trip at exactly window_end + horizon counts") {
    const auto label = label_window(w, {{11, 55, 59}}, 10, candidates);
    CHECK(label.pattern() == "01000");
  }
}

TEST_CASE("label exclusivity holds for every emitted label") {
  const auto trace = make_trace(300, {{11, 100, 110}, {12, 200, 210}});
  const auto ds = assemble({trace}, {11, 12}, 30, 3, 20);
  for (const auto& l : ds.labels) {
    std::size_t events = 0;
    for (std::size_t i = 1; i < l.bits.size(); ++i) events += l.bits[i];
    CHECK((l.bits[0] == 1) == (events == 0));
  }
}

TEST_CASE("assemble composition and feature length") {
  const auto trace = make_trace(200);
  const auto ds = assemble({trace}, {11, 12, 13, 14}, 166, 10, 10);
  CHECK(ds.size() == 3);
  CHECK(ds.meta.n_features == 4);  // 1 sensor x 4 channels
  for (const auto& f : ds.features) CHECK(f.size() == 166 * 4);

  CHECK_THROWS_AS(assemble({}, {11}, 10, 1, 0), Error);

  auto other = make_trace(200);
  other.sensor_buses = {9};
  CHECK_THROWS_AS(assemble({trace, other}, {11}, 10, 1, 0), Error);
}

TEST_CASE("flattening is slot-major and round-trips") {
  const auto trace = make_trace(30);
  const auto ds = assemble({trace}, {11}, 5, 1, 0);
  // Sample 0 starts at slot 0: entry (slot a, feature b) = a*10 + b.
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      CHECK(ds.features[0][a * 4 + b] == static_cast<double>(a) * 10.0 + b);
}

TEST_CASE("split_folds sizes, determinism, partition") {
  const auto trace = make_trace(300, {{11, 100, 110}});
  auto ds = assemble({trace}, {11, 12}, 20, 3, 15);
  REQUIRE(ds.size() >= 10);

  // Trim to exactly 10 samples for the balanced-remainder check.
  ds.features.resize(10);
  ds.labels.resize(10);
  ds.folds.assign(10, -1);
  split_folds(ds, 3, 42);
  std::vector<int> sizes(3, 0);
  for (int f : ds.folds) {
    REQUIRE(f >= 0);
    REQUIRE(f < 3);
    ++sizes[static_cast<std::size_t>(f)];
  }
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<int>{3, 3, 4});

  auto ds2 = ds;
  ds2.folds.assign(10, -1);
  split_folds(ds2, 3, 42);
  CHECK(ds.folds == ds2.folds);

  ds.features.resize(9);
  ds.labels.resize(9);
  ds.folds.assign(9, -1);
  split_folds(ds, 3, 1);
  sizes.assign(3, 0);
  for (int f : ds.folds) ++sizes[static_cast<std::size_t>(f)];
  CHECK(sizes == std::vector<int>{3, 3, 3});

  Dataset tiny;
  tiny.features = {{1.0}, {2.0}};
  tiny.labels = {LabelVector::normal(1), LabelVector::normal(1)};
  tiny.folds = {-1, -1};
  CHECK_THROWS_AS(split_folds(tiny, 3, 1), Error);
}

TEST_CASE("stratification spreads each pattern across folds") {
  Dataset ds;
  for (int i = 0; i < 30; ++i) {
    ds.features.push_back({static_cast<double>(i)});
    LabelVector l = LabelVector::normal(2);
    if (i % 3 == 0) {  // 10 samples of an event pattern
      l.bits[0] = 0;
      l.bits[1] = 1;
    }
    ds.labels.push_back(l);
  }
  ds.folds.assign(30, -1);
  split_folds(ds, 3, 7);
  std::vector<int> event_per_fold(3, 0);
  for (std::size_t i = 0; i < 30; ++i)
    if (ds.labels[i].bits[1])
      ++event_per_fold[static_cast<std::size_t>(ds.folds[i])];
  for (int c : event_per_fold) CHECK(c >= 3);
}
