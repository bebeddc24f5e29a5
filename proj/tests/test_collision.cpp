#include <gtest/gtest.h>

#include <random>

#include "canopy/forest_map.hpp"

using namespace canopy;

namespace {

ForestMap one_trunk_map() {
  ForestMap map;
  map.bounds.min = Eigen::Vector3d(-5, -5, 0);
  map.bounds.max = Eigen::Vector3d(5, 5, 3);
  map.inflation_radius = 0.3;
  map.obstacles.push_back(CylinderObstacle{0.0, 0.0, 0.2, 0.0, 2.0});
  return map;
}

// Dense-sampling oracle at 1 mm resolution along the segment.
bool sampled_segment_collision(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                               const ForestMap& map) {
  const double len = (b - a).norm();
  const int n = std::max(2, static_cast<int>(std::ceil(len / 1e-3)) + 1);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    if (in_collision(a + t * (b - a), map)) return true;
  }
  return false;
}

}  // namespace

TEST(PointCollision, TrunkAxisAndBoundary) {
  const ForestMap map = one_trunk_map();
  EXPECT_TRUE(in_collision(Eigen::Vector3d(0, 0, 1.0), map));  // on the axis, mid height
  // boundary plus epsilon is free, boundary itself collides (closed obstacle)
  EXPECT_FALSE(in_collision(Eigen::Vector3d(0.2 + 0.3 + 0.01, 0, 1.0), map));
  EXPECT_TRUE(in_collision(Eigen::Vector3d(0.2 + 0.3, 0, 1.0), map));
}

TEST(PointCollision, AboveTrunkIsFree) {
  const ForestMap map = one_trunk_map();
  EXPECT_FALSE(in_collision(Eigen::Vector3d(0, 0, 2.5), map));  // above z_max, inside bounds
  EXPECT_TRUE(in_collision(Eigen::Vector3d(0, 0, 2.0), map));   // z band is closed
}

TEST(PointCollision, OutsideWorkspaceCollides) {
  const ForestMap map = one_trunk_map();
  EXPECT_TRUE(in_collision(Eigen::Vector3d(5.1, 0, 1), map));
  EXPECT_TRUE(in_collision(Eigen::Vector3d(0, 0, -0.1), map));
  EXPECT_TRUE(in_collision(Eigen::Vector3d(4.9, 5.2, 2.9), map));
  EXPECT_FALSE(in_collision(Eigen::Vector3d(4.9, 4.9, 2.9), map));  // inside, clear of the trunk
}

TEST(SegmentCollision, ThroughAxis) {
  const ForestMap map = one_trunk_map();
  EXPECT_TRUE(segment_in_collision(Eigen::Vector3d(-2, 0, 1), Eigen::Vector3d(2, 0, 1), map));
}

TEST(SegmentCollision, AboveAllTrunks) {
  const ForestMap map = one_trunk_map();
  EXPECT_FALSE(segment_in_collision(Eigen::Vector3d(-2, 0, 2.5), Eigen::Vector3d(2, 0, 2.5), map));
}

TEST(SegmentCollision, TangentCountsAsCollision) {
  const ForestMap map = one_trunk_map();
  const double r = 0.2 + 0.3;
  // passes exactly tangent to the inflated surface
  EXPECT_TRUE(segment_in_collision(Eigen::Vector3d(-2, r, 1), Eigen::Vector3d(2, r, 1), map));
  EXPECT_FALSE(
      segment_in_collision(Eigen::Vector3d(-2, r + 1e-6, 1), Eigen::Vector3d(2, r + 1e-6, 1), map));
}

TEST(SegmentCollision, EndpointsOutsideBoundsCollide) {
  const ForestMap map = one_trunk_map();
  EXPECT_TRUE(segment_in_collision(Eigen::Vector3d(-6, 0, 1), Eigen::Vector3d(-4, 0, 1), map));
}

TEST(SegmentCollision, VerticalSegments) {
  const ForestMap map = one_trunk_map();
  // vertical drop though the trunk's top cap
  EXPECT_TRUE(segment_in_collision(Eigen::Vector3d(0.1, 0, 2.8), Eigen::Vector3d(0.1, 0, 1.0), map));
  // vertical segment fully above
  EXPECT_FALSE(
      segment_in_collision(Eigen::Vector3d(0.1, 0, 2.2), Eigen::Vector3d(0.1, 0, 2.9), map));
  // vertical segment beside the trunk
  EXPECT_FALSE(
      segment_in_collision(Eigen::Vector3d(1.0, 0, 0.2), Eigen::Vector3d(1.0, 0, 2.8), map));
}

// The exact test must agree with the 1 mm dense-sampling oracle away from a
// 1 mm band around the inflated surface (the oracle cannot resolve closer).
TEST(SegmentCollision, AgreesWithDenseSamplingOracle) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uxy(-4.5, 4.5);
  std::uniform_real_distribution<double> uz(0.05, 2.95);
  std::uniform_real_distribution<double> ur(0.1, 0.5);

  ForestMap map;
  map.bounds.min = Eigen::Vector3d(-5, -5, 0);
  map.bounds.max = Eigen::Vector3d(5, 5, 3);
  map.inflation_radius = 0.25;
  for (int i = 0; i < 12; ++i)
    map.obstacles.push_back(CylinderObstacle{uxy(rng), uxy(rng), ur(rng), 0.0, uz(rng)});

  int disagreements_outside_band = 0;
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::Vector3d a(uxy(rng), uxy(rng), uz(rng));
    const Eigen::Vector3d b(uxy(rng), uxy(rng), uz(rng));
    const bool exact = segment_in_collision(a, b, map);
    const bool sampled = sampled_segment_collision(a, b, map);
    ++checked;
    if (exact != sampled) {
      // disagreement is only legitimate within the sampling band
      const double margin = std::abs(segment_clearance(a, b, map, map.inflation_radius));
      if (margin > 1.5e-3) ++disagreements_outside_band;
    }
  }
  EXPECT_EQ(disagreements_outside_band, 0);
  EXPECT_EQ(checked, 10000);
}

TEST(SegmentClearance, SignMatchesCollision) {
  const ForestMap map = one_trunk_map();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::uniform_real_distribution<double> uz(0.1, 2.9);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d a(u(rng), u(rng), uz(rng));
    const Eigen::Vector3d b(u(rng), u(rng), uz(rng));
    const double c = segment_clearance(a, b, map, map.inflation_radius);
    if (std::abs(c) < 1e-9) continue;
    EXPECT_EQ(segment_in_collision(a, b, map), c <= 0.0);
  }
}
