#include <gtest/gtest.h>

#include "canopy/reference.hpp"

using namespace canopy;

namespace {

double samplewise_max_spacing(const ReferenceStream& s) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < s.samples.size(); ++i)
    worst = std::max(worst, (s.samples[i + 1].position - s.samples[i].position).norm());
  return worst;
}

}  // namespace

TEST(GenScan, FullRotationTiming) {
  const ViewPoseRef pose = make_view_pose(Eigen::Vector3d(1, 2, 1.5), 30.0);
  const ReferenceStream s = gen_scan(pose, 36.0);
  EXPECT_NEAR(s.duration(), 10.0, 1e-9);  // 360 / 36
  EXPECT_EQ(s.samples.size(), 1001u);     // 10 s at 100 Hz, endpoint included
  // closure: first and last yaw equal modulo 360
  EXPECT_NEAR(ang_diff_deg(s.samples.back().yaw_deg, s.samples.front().yaw_deg), 0.0, 1e-9);
}

TEST(GenScan, PositionConstantAndYawWrapped) {
  const ViewPoseRef pose = make_view_pose(Eigen::Vector3d(0, 0, 1.2), 170.0);
  const ReferenceStream s = gen_scan(pose, 45.0);
  for (const auto& r : s.samples) {
    ASSERT_EQ(r.position, pose.position);
    ASSERT_GE(r.yaw_deg, -180.0);
    ASSERT_LT(r.yaw_deg, 180.0);
  }
}

TEST(GenCircle, StandoffAltitudeAndFacing) {
  TrunkSpec trunk;
  trunk.center = Eigen::Vector2d(2.0, -1.0);
  trunk.radius = 0.2;
  trunk.standoff = 0.5;
  const ReferenceStream s = gen_circle(trunk, 1.3, 36.0, 1.0);
  for (const auto& r : s.samples) {
    const double d = (r.position.head<2>() - trunk.center).norm();
    ASSERT_NEAR(d, 0.7, 1e-9);  // radius + 50 cm standoff
    ASSERT_NEAR(r.position.z(), 1.3, 1e-12);
    // view axis toward the trunk center
    const double expected = yaw_facing_deg(r.position.head<2>(), trunk.center);
    ASSERT_NEAR(ang_diff_deg(r.yaw_deg, expected), 0.0, 1e-9);
  }
}

TEST(GenCircle, DueEastFacesWest) {
  TrunkSpec trunk;  // centered at the origin
  trunk.center = Eigen::Vector2d::Zero();
  trunk.radius = 0.2;
  trunk.standoff = 0.5;
  const ReferenceStream s = gen_circle(trunk, 1.0, 36.0, 1.0, 0.0);  // starts due east
  // 180 degrees, up to the [-180, 180) wrap
  EXPECT_NEAR(std::abs(s.samples.front().yaw_deg), 180.0, 1e-9);
}

TEST(GenHelix, ProjectionMatchesCircleAndAffineZ) {
  TrunkSpec trunk;
  trunk.center = Eigen::Vector2d(1.0, 1.0);
  trunk.radius = 0.25;
  trunk.standoff = 0.5;
  const double z0 = 0.8, z1 = 1.6, climb = 0.1, rate = 45.0;
  const ReferenceStream helix = gen_helix(trunk, z0, z1, rate, climb);
  const ReferenceStream circle = gen_circle(trunk, 0.0, rate, (z1 - z0) / climb * rate / 360.0);

  ASSERT_EQ(helix.samples.size(), circle.samples.size());
  for (std::size_t k = 0; k < helix.samples.size(); ++k) {
    ASSERT_LT((helix.samples[k].position.head<2>() - circle.samples[k].position.head<2>()).norm(),
              1e-9);
    // z affine in t with slope = climb rate
    const double expected_z = std::min(z1, z0 + climb * helix.time_at(k));
    ASSERT_NEAR(helix.samples[k].position.z(), expected_z, 1e-9);
    const double standoff = (helix.samples[k].position.head<2>() - trunk.center).norm();
    ASSERT_NEAR(standoff, 0.75, 1e-9);
  }
  EXPECT_NEAR(helix.samples.back().position.z(), z1, 1e-12);
  EXPECT_NEAR(helix.duration(), (z1 - z0) / climb, 1e-9);
}

TEST(GenHelix, DescendingZ) {
  TrunkSpec trunk;
  trunk.center = Eigen::Vector2d::Zero();
  const ReferenceStream s = gen_helix(trunk, 1.6, 0.8, 45.0, 0.1);
  EXPECT_NEAR(s.samples.front().position.z(), 1.6, 1e-12);
  EXPECT_NEAR(s.samples.back().position.z(), 0.8, 1e-12);
  for (std::size_t k = 0; k + 1 < s.samples.size(); ++k)
    ASSERT_GE(s.samples[k].position.z(), s.samples[k + 1].position.z() - 1e-12);
}

TEST(GenViewPoses, GeometryAndFacing) {
  std::vector<TrunkSpec> trees(1);
  trees[0].center = Eigen::Vector2d::Zero();
  trees[0].radius = 0.2;
  trees[0].standoff = 1.0;
  const std::vector<ViewPoseRef> poses = gen_view_poses(trees, {1.0}, {0.0});
  ASSERT_EQ(poses.size(), 1u);
  EXPECT_LT((poses[0].position - Eigen::Vector3d(1.2, 0.0, 1.0)).norm(), 1e-12);
  EXPECT_NEAR(std::abs(poses[0].yaw_deg), 180.0, 1e-9);  // facing west toward the trunk
}

TEST(GenViewPoses, StandoffFromSurfaceAndYawToward) {
  std::vector<TrunkSpec> trees;
  std::vector<double> altitudes, bearings;
  for (int i = 0; i < 5; ++i) {
    TrunkSpec t;
    t.center = Eigen::Vector2d(3.0 * i, i % 2 == 0 ? 1.0 : -1.0);
    t.radius = 0.15 + 0.02 * i;
    t.standoff = 1.0;
    trees.push_back(t);
    altitudes.push_back(0.8 + 0.15 * i);
    bearings.push_back(72.0 * i - 120.0);
  }
  const std::vector<ViewPoseRef> poses = gen_view_poses(trees, altitudes, bearings);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const double d = (poses[i].position.head<2>() - trees[i].center).norm();
    EXPECT_NEAR(d, trees[i].radius + 1.0, 1e-9);
    EXPECT_NEAR(poses[i].position.z(), altitudes[i], 1e-12);
    const double expected = yaw_facing_deg(poses[i].position.head<2>(), trees[i].center);
    EXPECT_NEAR(ang_diff_deg(poses[i].yaw_deg, expected), 0.0, 1e-9);
  }
}

TEST(GenViewPoses, CollidingPoseRejected) {
  std::vector<TrunkSpec> trees(2);
  trees[0].center = Eigen::Vector2d(0.0, 0.0);
  trees[0].radius = 0.2;
  trees[0].standoff = 1.0;
  trees[1].center = Eigen::Vector2d(1.2, 0.0);  // directly on tree 0's east pose
  trees[1].radius = 0.2;
  trees[1].standoff = 1.0;

  ForestMap map;
  map.bounds.min = Eigen::Vector3d(-5, -5, 0);
  map.bounds.max = Eigen::Vector3d(5, 5, 3);
  map.inflation_radius = 0.3;
  for (const auto& t : trees)
    map.obstacles.push_back(CylinderObstacle{t.center.x(), t.center.y(), t.radius, 0.0, 2.0});

  EXPECT_THROW(gen_view_poses({trees[0]}, {1.0}, {0.0}, &map), std::invalid_argument);
  // facing away from the other trunk is fine
  EXPECT_NO_THROW(gen_view_poses({trees[0]}, {1.0}, {180.0}, &map));
}

TEST(PathToStream, TimingEndpointsAndSpacing) {
  WaypointPath path;
  path.waypoints.push_back({Eigen::Vector3d(0, 0, 1), 0.0});
  path.waypoints.push_back({Eigen::Vector3d(10, 0, 1), 0.0});
  path.recompute_length();

  const ReferenceStream s = path_to_stream(path, 1.0);
  EXPECT_NEAR(s.duration(), 10.0, 1e-9);  // 10 m at 1 m/s
  EXPECT_EQ(s.samples.front().position, path.waypoints.front().position);
  EXPECT_EQ(s.samples.back().position, path.waypoints.back().position);
  EXPECT_LE(samplewise_max_spacing(s), 1.0 / 100.0 + 1e-12);
}

TEST(PathToStream, YawShortestArc) {
  WaypointPath path;
  path.waypoints.push_back({Eigen::Vector3d(0, 0, 1), 170.0});
  path.waypoints.push_back({Eigen::Vector3d(1, 0, 1), -170.0});  // 20 degrees the short way
  path.recompute_length();
  const ReferenceStream s = path_to_stream(path, 1.0);
  for (std::size_t k = 0; k + 1 < s.samples.size(); ++k) {
    const double step = std::abs(ang_diff_deg(s.samples[k + 1].yaw_deg, s.samples[k].yaw_deg));
    ASSERT_LT(step, 1.0);  // never unwinds the long way
  }
  EXPECT_NEAR(s.samples.back().yaw_deg, -170.0, 1e-9);
}

TEST(Streams, DeterministicAndUniform) {
  TrunkSpec trunk;
  trunk.center = Eigen::Vector2d(0.5, 0.5);
  const ReferenceStream a = gen_circle(trunk, 1.0, 36.0, 1.0);
  const ReferenceStream b = gen_circle(trunk, 1.0, 36.0, 1.0);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    ASSERT_EQ(a.samples[k].position, b.samples[k].position);
    ASSERT_EQ(a.samples[k].yaw_deg, b.samples[k].yaw_deg);
  }
  EXPECT_DOUBLE_EQ(a.dt, kControlDt);
}

TEST(Streams, AllYawsWrapped) {
  TrunkSpec trunk;
  trunk.center = Eigen::Vector2d::Zero();
  for (const auto& s :
       {gen_scan(make_view_pose(Eigen::Vector3d(0, 0, 1), 100.0), 50.0),
        gen_circle(trunk, 1.0, 60.0, 2.0), gen_helix(trunk, 0.5, 1.5, 60.0, 0.2)}) {
    for (const auto& r : s.samples) {
      ASSERT_GE(r.yaw_deg, -180.0);
      ASSERT_LT(r.yaw_deg, 180.0);
    }
  }
}

TEST(GenHold, ConstantPose) {
  const ViewPoseRef pose = make_view_pose(Eigen::Vector3d(1, 1, 1), 45.0);
  const ReferenceStream s = gen_hold(pose, 2.0);
  EXPECT_EQ(s.samples.size(), 201u);
  for (const auto& r : s.samples) ASSERT_EQ(r.position, pose.position);
}
