#include <algorithm>
#include <random>
#include <set>

#include <doctest.h>

#include "dsub/seeding.hpp"
#include "support/oracles.hpp"

using namespace dsub;
using seeding::OssLoss;
using seeding::OssOptions;

namespace {

DataMatrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Index>(rows.size());
  const auto p = static_cast<Index>(rows.begin()->size());
  DataMatrix d{Matrix(n, p), std::nullopt};
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) d.x(i, j++) = v;
    ++i;
  }
  return d;
}

std::set<Index> as_set(const Selection& s) { return {s.indices.begin(), s.indices.end()}; }

bool distinct_and_valid(const Selection& s, Index n) {
  return as_set(s).size() == s.size() &&
         std::all_of(s.indices.begin(), s.indices.end(),
                     [n](Index i) { return i >= 0 && i < n; });
}

}  // namespace

TEST_CASE("scale_to_unit_cube") {
  SUBCASE("endpoints map to -1 and +1") {
    const DataMatrix d = rows_of({{0.0}, {5.0}, {10.0}});
    const auto [scaled, params] = seeding::scale_to_unit_cube(d);
    CHECK(scaled.x(0, 0) == -1.0);
    CHECK(scaled.x(1, 0) == 0.0);
    CHECK(scaled.x(2, 0) == 1.0);
    CHECK(params.min(0) == 0.0);
    CHECK(params.max(0) == 10.0);
  }
  SUBCASE("a column spanning [-1,1] is unchanged") {
    const DataMatrix d = rows_of({{-1.0}, {0.25}, {1.0}, {-0.5}});
    CHECK(seeding::scale_to_unit_cube(d).first.x == d.x);
  }
  SUBCASE("round trip") {
    std::mt19937_64 rng(1);
    const DataMatrix d = oracle::random_data(rng, 50, 4, 7.0);
    const auto [scaled, params] = seeding::scale_to_unit_cube(d);
    CHECK((params.invert(scaled).x - d.x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(scaled.x.maxCoeff() <= 1.0);
    CHECK(scaled.x.minCoeff() >= -1.0);
  }
  SUBCASE("constant column is rejected") {
    const DataMatrix d = rows_of({{1.0, 2.0}, {1.0, 3.0}});
    CHECK_THROWS_AS(seeding::scale_to_unit_cube(d), std::invalid_argument);
  }
}

TEST_CASE("uniform_seed") {
  std::mt19937_64 rng(3);
  const DataMatrix big = oracle::random_data(rng, 10000, 2);
  const Selection s = seeding::uniform_seed(big, 100, 42);
  CHECK(s.size() == 100);
  CHECK(distinct_and_valid(s, big.n()));
  CHECK(s.source == SelectionSource::uniform);
  CHECK(seeding::uniform_seed(big, 100, 42).indices == s.indices);
  CHECK(seeding::uniform_seed(big, 100, 43).indices != s.indices);

  const DataMatrix small = oracle::random_data(rng, 12, 2);
  const Selection all = seeding::uniform_seed(small, 12, 9);
  CHECK(as_set(all).size() == 12);
  CHECK_THROWS_AS(seeding::uniform_seed(small, 13, 9), std::invalid_argument);
}

TEST_CASE("iboss_seed") {
  SUBCASE("p=1 hand-sorted example") {
    // rows 1..8 in one-based terms hold 5,1,9,3,7,2,8,4
    const DataMatrix d = rows_of({{5}, {1}, {9}, {3}, {7}, {2}, {8}, {4}});
    const Selection s = seeding::iboss_seed(d, 4);
    CHECK(s.indices == std::vector<Index>{1, 5, 2, 6});
    CHECK(s.source == SelectionSource::iboss);
  }
  SUBCASE("a row taken for covariate 1 is excluded for covariate 2") {
    const DataMatrix d = rows_of({{-10, -10}, {0, -5}, {10, 0}, {1, 8}, {2, 1}, {3, 2}});
    const Selection s = seeding::iboss_seed(d, 4);
    CHECK(s.indices == std::vector<Index>{0, 2, 1, 3});
  }
  SUBCASE("remainder goes one per extreme from covariate 1") {
    std::mt19937_64 rng(8);
    const DataMatrix d = oracle::random_data(rng, 40, 2);
    const Selection s = seeding::iboss_seed(d, 7);  // base 1, remainder 3
    REQUIRE(s.size() == 7);
    // first two picks are the two smallest of covariate 1
    std::vector<Index> order(40);
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return d.x(a, 0) < d.x(b, 0); });
    CHECK(s.indices[0] == order[0]);
    CHECK(s.indices[1] == order[1]);
    CHECK(s.indices[2] == order[39]);
    CHECK(s.indices[3] == order[38]);
  }
  SUBCASE("k = n takes everything") {
    const DataMatrix d = rows_of({{1, 4}, {2, 3}, {3, 2}, {4, 1}, {5, 0}});
    CHECK(as_set(seeding::iboss_seed(d, 5)).size() == 5);
  }
  SUBCASE("ties resolve to the lower row index") {
    const DataMatrix d = rows_of({{1}, {0}, {0}, {2}, {2}});
    CHECK(seeding::iboss_seed(d, 2).indices == std::vector<Index>{1, 3});
  }
  SUBCASE("k > n") {
    const DataMatrix d = rows_of({{1}, {2}});
    CHECK_THROWS_AS(seeding::iboss_seed(d, 3), std::invalid_argument);
  }
  SUBCASE("properties on random data") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
      const Index p = 1 + trial % 5;
      const Index n = 30 + trial;
      const Index k = 2 + trial % 20;
      DataMatrix d = oracle::random_data(rng, n, p, 2.0);
      const Selection s = seeding::iboss_seed(d, k);
      CHECK(s.size() == static_cast<std::size_t>(k));
      CHECK(distinct_and_valid(s, n));
      Index arg_min = 0, arg_max = 0;
      d.x.col(0).minCoeff(&arg_min);
      d.x.col(0).maxCoeff(&arg_max);
      CHECK(as_set(s).count(arg_min) == 1);
      CHECK(as_set(s).count(arg_max) == 1);
      // positive-slope affine maps preserve per-column order
      const DataMatrix scaled = seeding::scale_to_unit_cube(d).first;
      CHECK(seeding::iboss_seed(scaled, k).indices == s.indices);
    }
  }
}

TEST_CASE("oss_seed with the match-count loss") {
  const OssOptions match{OssLoss::match_count, 0.0};
  SUBCASE("corners beat interior points") {
    const DataMatrix d = rows_of({{0.2, 0.1}, {1, 1}, {-0.5, 0.3}, {-1, 1}, {0.0, -0.6},
                                  {1, -1}, {0.4, 0.4}, {-1, -1}});
    CHECK(as_set(seeding::oss_seed(d, 4, match)) == std::set<Index>{1, 3, 5, 7});
  }
  SUBCASE("p=1 picks the two opposite endpoints") {
    const DataMatrix d = rows_of({{-1}, {1}, {0.9}, {-0.9}, {0}});
    CHECK(seeding::oss_seed(d, 2, match).indices == std::vector<Index>{0, 1});
  }
  SUBCASE("k=1 is the largest norm, lowest index on ties") {
    const DataMatrix d = rows_of({{0.5, 0.5}, {1, -1}, {-1, 1}, {0, 0.2}});
    CHECK(seeding::oss_seed(d, 1, match).indices == std::vector<Index>{1});
  }
  SUBCASE("a full factorial inside the data is selected exactly") {
    std::mt19937_64 rng(17);
    for (Index p : {2, 3}) {
      const Matrix fact = oracle::full_factorial(p);
      const Index extra = 20;
      DataMatrix d{Matrix(fact.rows() + extra, p), std::nullopt};
      std::uniform_real_distribution<double> interior(-0.95, 0.95);
      for (Index i = 0; i < extra; ++i) {
        for (Index j = 0; j < p; ++j) d.x(i, j) = interior(rng);
      }
      d.x.bottomRows(fact.rows()) = fact;
      const Selection s = seeding::oss_seed(d, fact.rows(), match);
      for (Index i : s.indices) CHECK(i >= extra);
    }
  }
}

TEST_CASE("oss_seed with the default sign-agreement loss") {
  SUBCASE("p=1 enumerated example") {
    // After -1, the losses are: +1 -> 1, 0.9 -> 0.819025, -0.9 -> 1.199025,
    // 0 -> 0.25 (zero counts as positive, so it disagrees with -1).
    const DataMatrix d = rows_of({{-1}, {1}, {0.9}, {-0.9}, {0}});
    CHECK(seeding::oss_seed(d, 2).indices == std::vector<Index>{0, 4});
  }
  SUBCASE("2^2 factorial picks an orthogonal corner second") {
    const DataMatrix d{oracle::full_factorial(2), std::nullopt};
    const Selection s = seeding::oss_seed(d, 2);
    // row 0 is (-1,-1); (1,1) would give delta = -2, the others delta = 0
    CHECK(s.indices == std::vector<Index>{0, 1});
    CHECK(as_set(seeding::oss_seed(d, 4)).size() == 4);
  }
}

TEST_CASE("oss_seed agrees with a literal greedy oracle") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const Index p = 1 + trial % 6;
    const Index n = 25 + trial;
    const Index k = 2 + trial % 10;
    const DataMatrix raw = oracle::random_data(rng, n, p);
    const DataMatrix d = seeding::scale_to_unit_cube(raw).first;
    const bool signed_term = trial % 2 == 0;
    const OssOptions opt{signed_term ? OssLoss::sign_agreement : OssLoss::match_count, 0.0};
    const Selection s = seeding::oss_seed(raw, k, opt);
    CHECK(s.indices == oracle::oss_greedy(d, k, signed_term));
    CHECK(s.source == SelectionSource::oss);
  }
}

TEST_CASE("oss_seed pruning keeps cardinality and validity") {
  std::mt19937_64 rng(41);
  const DataMatrix d = oracle::random_data(rng, 500, 4);
  const Selection pruned = seeding::oss_seed(d, 40, {OssLoss::sign_agreement, 0.3});
  CHECK(pruned.size() == 40);
  CHECK(distinct_and_valid(pruned, d.n()));
  CHECK_THROWS_AS(seeding::oss_seed(d, 40, {OssLoss::sign_agreement, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(seeding::oss_seed(d, 501), std::invalid_argument);
}
