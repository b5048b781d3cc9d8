#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "frmc/errors.hpp"
#include "frmc/matcher.hpp"
#include "frmc/rng.hpp"

namespace frmc {
namespace {

std::vector<std::size_t> brute(const std::vector<double>& pts, std::size_t d, std::span<const double> c, double r) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < pts.size() / d; ++n) {
    if (squared_distance({pts.data() + n * d, d}, c) <= r * r) out.push_back(n);
  }
  return out;
}

std::vector<double> uniform_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  RandomStream rng(seed, StreamRole::bench, 0);
  std::vector<double> p(n * d);
  for (double& v : p) v = rng.uniform();
  return p;
}

TEST(SpatialIndex, EmptyIndex) {
  const SpatialIndex idx = build_index({}, 2, 0.1);
  EXPECT_EQ(idx.size(), 0u);
  EXPECT_TRUE(query_ball(idx, std::vector<double>{0.0, 0.0}, 0.1).empty());
}

TEST(SpatialIndex, IdenticalPointsShareOneCell) {
  const std::vector<double> p(50 * 3, 0.37);
  const SpatialIndex idx = build_index(p, 3, 0.2);
  EXPECT_EQ(idx.cell_count(), 1u);
  EXPECT_EQ(idx.members(idx.cell_of(std::vector<double>{0.37, 0.37, 0.37})).size(), 50u);
  EXPECT_EQ(query_ball(idx, std::vector<double>{0.37, 0.37, 0.37}, 0.2).size(), 50u);
}

TEST(SpatialIndex, OccupiedCellBound) {
  const SpatialIndex idx = build_index(uniform_points(1000, 2, 3), 2, 0.05);
  EXPECT_LE(idx.cell_count(), 441u);
}

TEST(SpatialIndex, EveryPointInItsCell) {
  const auto p = uniform_points(300, 3, 4);
  const SpatialIndex idx = build_index(p, 3, 0.13);
  std::size_t total = 0;
  for (std::size_t n = 0; n < 300; ++n) {
    const auto members = idx.members(idx.cell_of(idx.point(n)));
    EXPECT_NE(std::find(members.begin(), members.end(), n), members.end());
    const auto key = idx.cell_of(idx.point(n));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(key[i], static_cast<std::int64_t>(std::floor(p[n * 3 + i] / 0.13)));
  }
  std::vector<bool> seen(300, false);
  for (std::size_t n = 0; n < 300; ++n) {
    for (std::size_t m : idx.members(idx.cell_of(idx.point(n)))) {
      if (!seen[m]) ++total;
      seen[m] = true;
    }
  }
  EXPECT_EQ(total, 300u);
}

TEST(QueryBall, FarCenterIsEmpty) {
  const SpatialIndex idx = build_index(uniform_points(200, 2, 5), 2, 0.1);
  EXPECT_TRUE(query_ball(idx, std::vector<double>{50.0, -50.0}, 0.1).empty());
}

TEST(QueryBall, ContainsStoredPoint) {
  const auto p = uniform_points(200, 2, 6);
  const SpatialIndex idx = build_index(p, 2, 0.01);
  const auto hits = query_ball(idx, idx.point(17), 0.01);
  EXPECT_NE(std::find(hits.begin(), hits.end(), 17u), hits.end());
}

TEST(QueryBall, ClosedBallBoundary) {
  const std::vector<double> p = {0.0, 0.0, 0.5, 0.0};
  const SpatialIndex idx = build_index(p, 2, 0.5);
  EXPECT_EQ(query_ball(idx, std::vector<double>{0.0, 0.0}, 0.5), (std::vector<std::size_t>{0, 1}));
}

TEST(QueryBall, MatchesBruteForce500x50) {
  const auto p = uniform_points(500, 2, 7);
  const auto q = uniform_points(50, 2, 8);
  const SpatialIndex idx = build_index(p, 2, 0.08);
  for (std::size_t i = 0; i < 50; ++i) {
    const std::span<const double> c(q.data() + 2 * i, 2);
    EXPECT_EQ(query_ball(idx, c, 0.08), brute(p, 2, c, 0.08));
  }
}

TEST(QueryBall, MatchesBruteForceAcrossDimensions) {
  for (std::size_t d = 1; d <= 4; ++d) {
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      RandomStream rng(100 + trial, StreamRole::bench, d);
      const double r = 0.05 + 0.3 * rng.uniform();
      std::vector<double> p(400 * d), q(40 * d);
      for (double& v : p) v = 2.0 * rng.normal();
      for (double& v : q) v = 2.0 * rng.normal();
      const SpatialIndex idx = build_index(p, d, r);
      for (std::size_t i = 0; i < 40; ++i) {
        const std::span<const double> c(q.data() + d * i, d);
        EXPECT_EQ(query_ball(idx, c, r), brute(p, d, c, r)) << "d=" << d;
      }
    }
  }
}

TEST(QueryBall, ProbesThreeToTheD) {
  for (std::size_t d = 1; d <= 4; ++d) {
    const auto p = uniform_points(100, d, 9);
    const SpatialIndex idx = build_index(p, d, 0.1);
    std::vector<std::size_t> out;
    EXPECT_EQ(idx.query(std::vector<double>(d, 0.5), 0.1, out), static_cast<std::size_t>(std::pow(3.0, d)));
  }
}

TEST(QueryBall, ResultsSorted) {
  const auto p = uniform_points(2000, 2, 10);
  const SpatialIndex idx = build_index(p, 2, 0.2);
  const auto hits = query_ball(idx, std::vector<double>{0.5, 0.5}, 0.2);
  EXPECT_TRUE(std::is_sorted(hits.begin(), hits.end()));
  EXPECT_GT(hits.size(), 100u);
}

TEST(QueryBall, RadiusMismatchIsUsageError) {
  const SpatialIndex idx = build_index(uniform_points(10, 2, 11), 2, 0.1);
  EXPECT_THROW(query_ball(idx, std::vector<double>{0.0, 0.0}, 0.2), UsageError);
}

TEST(BuildIndex, Validation) {
  std::vector<double> p = uniform_points(10, 2, 12);
  p[7] = std::numeric_limits<double>::quiet_NaN();
  try {
    build_index(p, 2, 0.1);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("index 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(build_index(uniform_points(10, 2, 1), 2, 0.0), ValidationError);
  EXPECT_THROW(build_index(uniform_points(10, 9, 1), 9, 0.1), ValidationError);
}

TEST(PairCount, ScalesLikeNSquaredEpsD) {
  std::vector<double> ratios;
  for (int e = 8; e <= 12; ++e) {
    const std::size_t N = std::size_t{1} << e;
    const double eps = std::pow(static_cast<double>(N), -0.4);
    RandomStream rng(13, StreamRole::bench, static_cast<std::uint64_t>(e));
    std::vector<double> x(2 * N), y(2 * N);
    for (double& v : x) v = rng.normal();
    for (double& v : y) v = rng.normal();
    const SpatialIndex idx = build_index(x, 2, eps);
    std::size_t pairs = 0;
    std::vector<std::size_t> hits;
    for (std::size_t m = 0; m < N; ++m) {
      idx.query({y.data() + 2 * m, 2}, eps, hits);
      pairs += hits.size();
    }
    ratios.push_back(static_cast<double>(pairs) / (static_cast<double>(N) * N * eps * eps));
  }
  const double mid = ratios[ratios.size() / 2];
  for (double r : ratios) {
    EXPECT_GT(r, 0.5 * mid);
    EXPECT_LT(r, 1.5 * mid);
  }
}

}  // namespace
}  // namespace frmc
