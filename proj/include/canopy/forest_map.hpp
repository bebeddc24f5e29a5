#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace canopy {

/// Vertically bounded cylinder abstracting a trunk.
struct CylinderObstacle {
  double x = 0.0, y = 0.0;  // axis point
  double radius = 0.0;
  double z_min = 0.0, z_max = 0.0;

  void validate() const {
    if (!(radius > 0.0) || !(z_min < z_max))
      throw std::invalid_argument("CylinderObstacle: radius > 0 and z_min < z_max required");
  }
};

struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Eigen::Vector3d extent() const { return max - min; }
};

struct ForestMap {
  std::vector<CylinderObstacle> obstacles;
  Aabb bounds;
  double inflation_radius = 0.3;  // planning safety margin added to radii
};

/// Point collision against the inflated map: outside the workspace or inside
/// any inflated cylinder (closed: the boundary collides). `inflation`
/// overrides the map margin; pass 0 for physical (un-inflated) checks.
inline bool in_collision(const Eigen::Vector3d& p, const ForestMap& map, double inflation) {
  if (!map.bounds.contains(p)) return true;
  for (const auto& obs : map.obstacles) {
    if (p.z() < obs.z_min || p.z() > obs.z_max) continue;
    const double dx = p.x() - obs.x, dy = p.y() - obs.y;
    const double r = obs.radius + inflation;
    if (dx * dx + dy * dy <= r * r) return true;
  }
  return false;
}

inline bool in_collision(const Eigen::Vector3d& p, const ForestMap& map) {
  return in_collision(p, map, map.inflation_radius);
}

namespace detail {

// Closest approach of segment a-b to the vertical axis of one cylinder,
// restricted to the parameter window where the segment is inside the
// cylinder's z band. Exact: the squared planar distance is quadratic in t.
inline bool segment_hits_cylinder(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                  const CylinderObstacle& obs, double inflation) {
  double t_lo = 0.0, t_hi = 1.0;
  const double dz = b.z() - a.z();
  if (std::abs(dz) < 1e-15) {
    if (a.z() < obs.z_min || a.z() > obs.z_max) return false;
  } else {
    double t0 = (obs.z_min - a.z()) / dz;
    double t1 = (obs.z_max - a.z()) / dz;
    if (t0 > t1) std::swap(t0, t1);
    t_lo = std::max(t_lo, t0);
    t_hi = std::min(t_hi, t1);
    if (t_lo > t_hi) return false;
  }

  const double px = a.x() - obs.x, py = a.y() - obs.y;
  const double ux = b.x() - a.x(), uy = b.y() - a.y();
  // f(t) = |p + t u|^2 = uu t^2 + 2 pu t + pp
  const double uu = ux * ux + uy * uy;
  const double pu = px * ux + py * uy;
  const double pp = px * px + py * py;

  double t_star = t_lo;
  if (uu > 0.0) t_star = std::clamp(-pu / uu, t_lo, t_hi);
  const double min_sq = uu * t_star * t_star + 2.0 * pu * t_star + pp;

  const double r = obs.radius + inflation;
  return min_sq <= r * r;
}

}  // namespace detail

/// Segment collision: exact segment-vs-inflated-cylinder test, plus workspace
/// containment (a box is convex, so checking the endpoints suffices).
inline bool segment_in_collision(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                 const ForestMap& map, double inflation) {
  if (!map.bounds.contains(a) || !map.bounds.contains(b)) return true;
  for (const auto& obs : map.obstacles)
    if (detail::segment_hits_cylinder(a, b, obs, inflation)) return true;
  return false;
}

inline bool segment_in_collision(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                 const ForestMap& map) {
  return segment_in_collision(a, b, map, map.inflation_radius);
}

/// Smallest horizontal clearance between the segment (within each obstacle's
/// z band) and any inflated obstacle surface. Negative when penetrating.
/// Used by audits to reason about boundary cases.
inline double segment_clearance(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                const ForestMap& map, double inflation) {
  double clearance = std::numeric_limits<double>::infinity();
  for (const auto& obs : map.obstacles) {
    double t_lo = 0.0, t_hi = 1.0;
    const double dz = b.z() - a.z();
    if (std::abs(dz) < 1e-15) {
      if (a.z() < obs.z_min || a.z() > obs.z_max) continue;
    } else {
      double t0 = (obs.z_min - a.z()) / dz;
      double t1 = (obs.z_max - a.z()) / dz;
      if (t0 > t1) std::swap(t0, t1);
      t_lo = std::max(t_lo, t0);
      t_hi = std::min(t_hi, t1);
      if (t_lo > t_hi) continue;
    }
    const double px = a.x() - obs.x, py = a.y() - obs.y;
    const double ux = b.x() - a.x(), uy = b.y() - a.y();
    const double uu = ux * ux + uy * uy;
    const double pu = px * ux + py * uy;
    const double pp = px * px + py * py;
    double t_star = t_lo;
    if (uu > 0.0) t_star = std::clamp(-pu / uu, t_lo, t_hi);
    const double dist = std::sqrt(std::max(0.0, uu * t_star * t_star + 2.0 * pu * t_star + pp));
    clearance = std::min(clearance, dist - (obs.radius + inflation));
  }
  return clearance;
}

}  // namespace canopy
