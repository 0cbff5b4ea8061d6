#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "pef/fusion.hpp"
#include "pef/rng.hpp"

using namespace pef;

TEST_CASE("weighted vote counting") {
  SECTION("uniform weights, majority") {
    VotePanel panel{{{0, 0, 1}}, uniform_weights(3), 2};
    const auto r = fuse_votes(panel);
    CHECK(r.fused[0] == 0);
    CHECK(r.dist.p[0][0] == Catch::Approx(2.0 / 3.0).margin(1e-15));
    CHECK(r.dist.p[0][1] == Catch::Approx(1.0 / 3.0).margin(1e-15));
  }
  SECTION("unanimous votes give a one-hot row") {
    VotePanel panel{{{2, 2, 2}}, uniform_weights(3), 3};
    const auto r = fuse_votes(panel);
    CHECK(r.fused[0] == 2);
    CHECK(r.dist.p[0][2] == 1.0);
  }
  SECTION("tie resolves to the lowest class index") {
    VotePanel panel{{{0, 1, 1}}, {0.5, 0.25, 0.25}, 2};
    const auto r = fuse_votes(panel);
    CHECK(r.dist.p[0][0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(r.dist.p[0][1] == Catch::Approx(0.5).margin(1e-15));
    CHECK(r.fused[0] == 0);
  }
  SECTION("error paths") {
    CHECK_THROWS_AS(fuse_votes(VotePanel{{}, uniform_weights(3), 2}), Error);
    CHECK_THROWS_AS(fuse_votes(VotePanel{{{0, 0}}, {0.9, 0.9}, 2}), Error);
    CHECK_THROWS_AS(fuse_votes(VotePanel{{{0}}, {1.0}, 2}), Error);
  }
}

TEST_CASE("confidence index endpoints") {
  SECTION("unanimous agreement -> E = 1") {
    VotePanel panel{{{1, 1, 1, 1}, {0, 0, 0, 0}}, uniform_weights(4), 3};
    const auto r = fuse_votes(panel);
    const auto c = confidence_index(r.dist, 4);
    CHECK(std::abs(c.index - 1.0) < 1e-12);
    for (double v : c.confidence) CHECK(std::abs(v - 1.0) < 1e-12);
  }
  SECTION("mutually distinct votes -> E = 0") {
    VotePanel panel{{{0, 1, 2, 3}}, uniform_weights(4), 4};
    const auto r = fuse_votes(panel);
    const auto c = confidence_index(r.dist, 4);
    CHECK(std::abs(c.index) < 1e-12);
  }
  SECTION("2/1/1 split with M = 4 -> E = 0.25") {
    VotePanel panel{{{0, 0, 1, 2}}, uniform_weights(4), 3};
    const auto r = fuse_votes(panel);
    const auto c = confidence_index(r.dist, 4);
    CHECK(c.entropy[0] == Catch::Approx(1.0397207708399179).margin(1e-12));
    CHECK(std::abs(c.index - 0.25) < 1e-12);
  }
  SECTION("M < 2 rejected") {
    VoteDistribution d{{{1.0}}, 1};
    CHECK_THROWS_AS(confidence_index(d, 1), Error);
  }
}

TEST_CASE("confidence index base invariance") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + rng.uniform_int(4);
    const int n_classes = 2 + static_cast<int>(rng.uniform_int(4));
    VotePanel panel;
    panel.weights = uniform_weights(m);
    panel.n_classes = n_classes;
    for (int s = 0; s < 5; ++s) {
      std::vector<int> row;
      for (std::size_t j = 0; j < m; ++j)
        row.push_back(static_cast<int>(rng.uniform_int(n_classes)));
      panel.votes.push_back(row);
    }
    const auto r = fuse_votes(panel);
    const auto c = confidence_index(r.dist, m);

    // Recompute in base 2.
    double total = 0.0;
    for (const auto& p : r.dist.p) {
      double h2 = 0.0;
      for (double v : p)
        if (v > 0.0) h2 -= v * std::log2(v);
      total += std::min(1.0, std::max(0.0, 1.0 - h2 / std::log2(double(m))));
    }
    CHECK(std::abs(c.index - total / r.dist.p.size()) < 1e-12);
  }
}

TEST_CASE("moving a vote onto the plurality class never lowers confidence") {
  Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 3 + rng.uniform_int(3);
    const int n_classes = 3;
    std::vector<int> row;
    for (std::size_t j = 0; j < m; ++j)
      row.push_back(static_cast<int>(rng.uniform_int(n_classes)));
    VotePanel panel{{row}, uniform_weights(m), n_classes};
    const auto fused = fuse_votes(panel);
    const auto before = confidence_index(fused.dist, m).confidence[0];

    auto merged = row;
    merged[rng.uniform_int(m)] = fused.fused[0];
    VotePanel panel2{{merged}, uniform_weights(m), n_classes};
    const auto after =
        confidence_index(fuse_votes(panel2).dist, m).confidence[0];
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("relabeling classes leaves E unchanged") {
  Rng rng(35);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 4;
    const int n_classes = 4;
    VotePanel panel;
    panel.weights = uniform_weights(m);
    panel.n_classes = n_classes;
    for (int s = 0; s < 6; ++s) {
      std::vector<int> row;
      for (std::size_t j = 0; j < m; ++j)
        row.push_back(static_cast<int>(rng.uniform_int(n_classes)));
      panel.votes.push_back(row);
    }
    std::vector<int> perm{0, 1, 2, 3};
    rng.shuffle(perm);
    VotePanel permuted = panel;
    for (auto& row : permuted.votes)
      for (auto& v : row) v = perm[static_cast<std::size_t>(v)];

    const auto a = confidence_index(fuse_votes(panel).dist, m);
    const auto b = confidence_index(fuse_votes(permuted).dist, m);
    CHECK(std::abs(a.index - b.index) < 1e-12);
  }
}

TEST_CASE("roc hand cases") {
  SECTION("perfect separation") {
    const auto r = roc_curve({0.9, 0.8, 0.2, 0.1}, {true, true, false, false});
    CHECK(std::abs(r.auc - 1.0) < 1e-12);
  }
  SECTION("constant scores give the diagonal") {
    const auto r = roc_curve({0.5, 0.5, 0.5, 0.5}, {true, false, true, false});
    CHECK(std::abs(r.auc - 0.5) < 1e-12);
    REQUIRE(r.points.size() == 2);  // single tie-grouped step
  }
  SECTION("4-sample hand case") {
    const auto r = roc_curve({0.9, 0.8, 0.3, 0.1}, {true, false, true, false});
    CHECK(std::abs(r.auc - 0.75) < 1e-12);
  }
  SECTION("single-class truth rejected") {
    CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {true, true}), Error);
  }
}

TEST_CASE("trapezoid AUC equals the concordant-pair oracle") {
  Rng rng(37);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(19);
    std::vector<double> scores;
    std::vector<bool> truth;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(std::round(rng.uniform() * 4.0) / 4.0);  // force ties
      const bool t = rng.uniform() < 0.5;
      truth.push_back(t);
      if (t) ++n_pos;
    }
    if (n_pos == 0 || n_pos == n) continue;

    double concordant = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!truth[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (truth[j]) continue;
        ++pairs;
        if (scores[i] > scores[j]) concordant += 1.0;
        else if (scores[i] == scores[j]) concordant += 0.5;
      }
    }
    const auto r = roc_curve(scores, truth);
    CHECK(std::abs(r.auc - concordant / pairs) < 1e-12);
  }
}

TEST_CASE("decide thresholds") {
  CHECK(decide(1, 1.0, 0.5).accepted);
  CHECK_FALSE(decide(1, 0.25, 0.5).accepted);
  CHECK(decide(2, 0.0, 0.0).accepted);
  CHECK(decide(2, 0.25, 0.5).fused_class == 2);
  CHECK_THROWS_AS(decide(0, 0.5, 1.5), Error);
}
