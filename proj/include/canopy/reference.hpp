#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "canopy/angles.hpp"
#include "canopy/env.hpp"
#include "canopy/forest_map.hpp"
#include "canopy/rrt_star.hpp"

namespace canopy {

/// Trunk to inspect: axis, radius, and how far from the trunk surface the
/// vehicle should stand.
struct TrunkSpec {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.2;    // m
  double standoff = 0.5;  // m, measured from the trunk surface

  void validate() const {
    if (!(radius > 0.0) || !(standoff > 0.0))
      throw std::invalid_argument("TrunkSpec: radius and standoff must be positive");
  }
};

/// Time-indexed reference poses at a fixed 100 Hz spacing, endpoint included.
struct ReferenceStream {
  double dt = kControlDt;
  std::vector<ViewPoseRef> samples;

  double time_at(std::size_t k) const { return static_cast<double>(k) * dt; }
  double duration() const { return samples.empty() ? 0.0 : time_at(samples.size() - 1); }
};

inline std::size_t stream_sample_count(double duration_s) {
  return static_cast<std::size_t>(std::llround(duration_s / kControlDt)) + 1;
}

/// In-place 360 degree scan: position held, yaw sweeps one revolution.
inline ReferenceStream gen_scan(const ViewPoseRef& center_pose, double angular_rate_deg) {
  if (!(angular_rate_deg > 0.0)) throw std::invalid_argument("gen_scan: rate must be positive");
  const double duration = 360.0 / angular_rate_deg;
  ReferenceStream s;
  const std::size_t n = stream_sample_count(duration);
  s.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = s.dt * static_cast<double>(k);
    s.samples.push_back(
        make_view_pose(center_pose.position, center_pose.yaw_deg + angular_rate_deg * t));
  }
  return s;
}

inline double yaw_facing_deg(const Eigen::Vector2d& from, const Eigen::Vector2d& toward) {
  return wrap_deg(rad2deg(std::atan2(toward.y() - from.y(), toward.x() - from.x())));
}

/// Circle around a trunk at fixed altitude, view axis on the trunk center.
/// Standoff is from the trunk surface, so the circle radius is
/// trunk.radius + trunk.standoff.
inline ReferenceStream gen_circle(const TrunkSpec& trunk, double altitude,
                                  double angular_rate_deg, double revolutions,
                                  double start_bearing_deg = 0.0) {
  trunk.validate();
  if (!(angular_rate_deg > 0.0) || !(revolutions > 0.0))
    throw std::invalid_argument("gen_circle: rate and revolutions must be positive");
  const double ring = trunk.radius + trunk.standoff;
  const double duration = revolutions * 360.0 / angular_rate_deg;
  ReferenceStream s;
  const std::size_t n = stream_sample_count(duration);
  s.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = s.dt * static_cast<double>(k);
    const double bearing = deg2rad(start_bearing_deg + angular_rate_deg * t);
    const Eigen::Vector2d xy =
        trunk.center + ring * Eigen::Vector2d(std::cos(bearing), std::sin(bearing));
    s.samples.push_back(make_view_pose(Eigen::Vector3d(xy.x(), xy.y(), altitude),
                                       yaw_facing_deg(xy, trunk.center)));
  }
  return s;
}

/// Helix around a trunk: circular motion with linear altitude interpolation,
/// view axis on the trunk center throughout.
inline ReferenceStream gen_helix(const TrunkSpec& trunk, double z_start, double z_end,
                                 double angular_rate_deg, double climb_rate,
                                 double start_bearing_deg = 0.0) {
  trunk.validate();
  if (z_end == z_start) throw std::invalid_argument("gen_helix: z_end must differ from z_start");
  if (!(angular_rate_deg > 0.0) || !(climb_rate > 0.0))
    throw std::invalid_argument("gen_helix: rates must be positive");
  const double ring = trunk.radius + trunk.standoff;
  const double duration = std::abs(z_end - z_start) / climb_rate;
  const double z_slope = climb_rate * (z_end > z_start ? 1.0 : -1.0);
  ReferenceStream s;
  const std::size_t n = stream_sample_count(duration);
  s.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = s.dt * static_cast<double>(k);
    const double bearing = deg2rad(start_bearing_deg + angular_rate_deg * t);
    const Eigen::Vector2d xy =
        trunk.center + ring * Eigen::Vector2d(std::cos(bearing), std::sin(bearing));
    const double z = (k + 1 == n) ? z_end : z_start + z_slope * t;
    s.samples.push_back(
        make_view_pose(Eigen::Vector3d(xy.x(), xy.y(), z), yaw_facing_deg(xy, trunk.center)));
  }
  return s;
}

/// Inspection view poses: one per tree, standing `standoff` off the trunk
/// surface along the approach bearing, view axis on the trunk center. When a
/// map is given, poses colliding with (inflated) obstacles are rejected.
inline std::vector<ViewPoseRef> gen_view_poses(const std::vector<TrunkSpec>& trees,
                                               const std::vector<double>& altitudes,
                                               const std::vector<double>& approach_bearing_deg,
                                               const ForestMap* map = nullptr) {
  if (trees.size() != altitudes.size() || trees.size() != approach_bearing_deg.size())
    throw std::invalid_argument("gen_view_poses: list lengths must match");
  std::vector<ViewPoseRef> poses;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    trees[i].validate();
    const double bearing = deg2rad(approach_bearing_deg[i]);
    const double ring = trees[i].radius + trees[i].standoff;
    const Eigen::Vector2d xy =
        trees[i].center + ring * Eigen::Vector2d(std::cos(bearing), std::sin(bearing));
    const Eigen::Vector3d p(xy.x(), xy.y(), altitudes[i]);
    if (map && in_collision(p, *map))
      throw std::invalid_argument("gen_view_poses: pose " + std::to_string(i) +
                                  " collides; adjust the approach bearing");
    poses.push_back(make_view_pose(p, yaw_facing_deg(xy, trees[i].center)));
  }
  return poses;
}

/// Constant-speed linear interpolation along a waypoint path at 100 Hz. Yaw
/// interpolates between waypoint headings along the shortest angular arc.
inline ReferenceStream path_to_stream(const WaypointPath& path, double cruise_speed) {
  if (path.waypoints.size() < 2) throw std::invalid_argument("path_to_stream: need >= 2 waypoints");
  if (!(cruise_speed > 0.0)) throw std::invalid_argument("path_to_stream: speed must be positive");

  std::vector<double> cum{0.0};
  for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i)
    cum.push_back(cum.back() +
                  (path.waypoints[i + 1].position - path.waypoints[i].position).norm());
  const double total = cum.back();

  ReferenceStream s;
  const std::size_t n = stream_sample_count(total / cruise_speed);
  s.samples.reserve(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dist = std::min(total, cruise_speed * s.dt * static_cast<double>(k));
    while (seg + 2 < cum.size() && cum[seg + 1] < dist) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double u = seg_len > 1e-12 ? (dist - cum[seg]) / seg_len : 0.0;
    const auto& a = path.waypoints[seg];
    const auto& b = path.waypoints[seg + 1];
    const Eigen::Vector3d p = a.position + u * (b.position - a.position);
    const double yaw = a.yaw_deg + u * ang_diff_deg(b.yaw_deg, a.yaw_deg);
    s.samples.push_back(make_view_pose(p, yaw));
  }
  // exact endpoint
  s.samples.back() = make_view_pose(path.waypoints.back().position,
                                    path.waypoints.back().yaw_deg);
  return s;
}

/// Hold one pose for a fixed duration.
inline ReferenceStream gen_hold(const ViewPoseRef& pose, double duration_s) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("gen_hold: duration must be positive");
  ReferenceStream s;
  const std::size_t n = stream_sample_count(duration_s);
  s.samples.assign(n, make_view_pose(pose.position, pose.yaw_deg));
  return s;
}

}  // namespace canopy
