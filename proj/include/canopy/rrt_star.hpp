#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "canopy/angles.hpp"
#include "canopy/forest_map.hpp"

namespace canopy {

constexpr double kMaxWaypointSpacing = 3.0;  // m, tracking envelope of the low-level controller

struct RRTConfig {
  double step_size = 0.5;        // m, steering step
  double neighbor_radius = 1.5;  // m, fixed-radius parent selection / rewiring
  int max_iterations = 5000;
  double goal_bias = 0.05;
  double goal_tolerance = 0.3;  // m
  uint64_t seed = 0;
};

struct Waypoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw_deg = 0.0;
};

struct WaypointPath {
  std::vector<Waypoint> waypoints;
  double length = 0.0;

  void recompute_length() {
    length = 0.0;
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
      length += (waypoints[i + 1].position - waypoints[i].position).norm();
  }
};

/// Yaw of the segment leaving each waypoint, in degrees wrapped to
/// [-180, 180). Planar-degenerate segments inherit the previous heading; the
/// final waypoint takes final_yaw_deg when given, else the last segment
/// heading.
inline std::vector<double> heading_profile(const std::vector<Eigen::Vector3d>& positions,
                                           std::optional<double> final_yaw_deg = std::nullopt) {
  const std::size_t n = positions.size();
  if (n < 2) throw std::invalid_argument("heading_profile: need at least two waypoints");

  std::vector<double> yaw(n, 0.0);
  // first defined heading, for leading degenerate segments
  double prev = 0.0;
  bool have_prev = false;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Eigen::Vector2d d = (positions[i + 1] - positions[i]).head<2>();
    if (d.norm() > 1e-12) {
      prev = rad2deg(std::atan2(d.y(), d.x()));
      have_prev = true;
      break;
    }
  }
  if (!have_prev && final_yaw_deg) prev = *final_yaw_deg;

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Eigen::Vector2d d = (positions[i + 1] - positions[i]).head<2>();
    if (d.norm() > 1e-12) prev = rad2deg(std::atan2(d.y(), d.x()));
    yaw[i] = wrap_deg(prev);
  }
  yaw[n - 1] = wrap_deg(final_yaw_deg ? *final_yaw_deg : prev);
  return yaw;
}

namespace detail {

// Uniform sample inside the prolate spheroid with foci `start`, `goal` and
// major axis length c_best (the informed subset that can improve the
// current solution).
inline Eigen::Vector3d sample_prolate_spheroid(const Eigen::Vector3d& start,
                                               const Eigen::Vector3d& goal, double c_best,
                                               std::mt19937_64& rng) {
  const double c_min = (goal - start).norm();
  const Eigen::Vector3d center = 0.5 * (start + goal);

  // rotation taking e_x onto the transverse axis
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  if (c_min > 1e-12) {
    const Eigen::Vector3d a1 = (goal - start) / c_min;
    const Eigen::Vector3d ref =
        std::abs(a1.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
    const Eigen::Vector3d a2 = a1.cross(ref).normalized();
    const Eigen::Vector3d a3 = a1.cross(a2);
    rot.col(0) = a1;
    rot.col(1) = a2;
    rot.col(2) = a3;
  }

  const double r1 = 0.5 * c_best;
  const double r2 = 0.5 * std::sqrt(std::max(0.0, c_best * c_best - c_min * c_min));

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Vector3d ball(gauss(rng), gauss(rng), gauss(rng));
  const double norm = ball.norm();
  if (norm > 1e-12) ball *= std::cbrt(unit(rng)) / norm;
  else ball.setZero();

  return center + rot * Eigen::Vector3d(r1 * ball.x(), r2 * ball.y(), r2 * ball.z());
}

inline bool inside_spheroid(const Eigen::Vector3d& p, const Eigen::Vector3d& start,
                            const Eigen::Vector3d& goal, double c_best) {
  return (p - start).norm() + (p - goal).norm() <= c_best + 1e-9;
}

struct TreeNode {
  Eigen::Vector3d position;
  int parent = -1;
  double cost = 0.0;
  std::vector<int> children;
};

}  // namespace detail

/// Optional instrumentation for audits: per-iteration best solution cost, the
/// accepted samples with the informed bound active when they were drawn, and
/// a final snapshot of the tree for structural checks.
struct RRTTrace {
  std::vector<double> best_cost_per_iteration;                  // inf until first solution
  std::vector<std::pair<Eigen::Vector3d, double>> accepted_samples;  // (sample, c_best at draw)
  std::vector<Eigen::Vector3d> node_positions;
  std::vector<int> node_parents;  // -1 for the root
  std::vector<double> node_costs;
};

/// Informed RRT*: uniform workspace sampling until a first solution exists,
/// then uniform sampling of the prolate spheroid that can still improve it.
/// Fixed-step steering, minimum-cost parent among fixed-radius neighbors,
/// rewiring with cost propagation. Returns the lowest-cost path whose end
/// lies within goal_tolerance of the goal, or nullopt.
inline std::optional<WaypointPath> plan_path(const Eigen::Vector3d& start,
                                             const Eigen::Vector3d& goal, const ForestMap& map,
                                             const RRTConfig& cfg, RRTTrace* trace = nullptr) {
  if (in_collision(start, map) || in_collision(goal, map))
    throw std::invalid_argument("plan_path: start or goal in collision");
  if (cfg.step_size <= 0.0 || cfg.max_iterations <= 0)
    throw std::invalid_argument("plan_path: invalid config");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_in_bounds = [&]() {
    Eigen::Vector3d p;
    for (int i = 0; i < 3; ++i)
      p(i) = map.bounds.min(i) + unit(rng) * (map.bounds.max(i) - map.bounds.min(i));
    return p;
  };

  std::vector<detail::TreeNode> nodes;
  nodes.push_back({start, -1, 0.0, {}});
  std::vector<int> goal_nodes;  // nodes within goal tolerance
  // solution cost is measured through to the goal point itself, so the
  // informed spheroid is never narrower than the straight-line distance
  double c_best = std::numeric_limits<double>::infinity();
  int best_goal = -1;

  // rewiring changes subtree costs; push the delta down the children lists
  auto propagate_cost = [&](int root, double delta) {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      nodes[id].cost += delta;
      for (int ch : nodes[id].children) stack.push_back(ch);
    }
  };

  auto refresh_best = [&]() {
    for (int id : goal_nodes) {
      const double through = nodes[id].cost + (nodes[id].position - goal).norm();
      if (through < c_best) {
        c_best = through;
        best_goal = id;
      }
    }
  };

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    // --- sample ---
    Eigen::Vector3d sample;
    if (unit(rng) < cfg.goal_bias) {
      sample = goal;
    } else if (best_goal >= 0) {
      int tries = 0;
      do {
        sample = detail::sample_prolate_spheroid(start, goal, c_best, rng);
      } while (!map.bounds.contains(sample) && ++tries < 1000);
      if (!map.bounds.contains(sample)) sample = goal;
    } else {
      sample = uniform_in_bounds();
    }

    // --- nearest + steer ---
    int nearest = 0;
    double nearest_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d2 = (nodes[i].position - sample).squaredNorm();
      if (d2 < nearest_d2) {
        nearest_d2 = d2;
        nearest = static_cast<int>(i);
      }
    }
    const double nearest_d = std::sqrt(nearest_d2);
    if (nearest_d < 1e-9) {
      if (trace) trace->best_cost_per_iteration.push_back(c_best);
      continue;
    }
    const Eigen::Vector3d new_pos =
        nearest_d <= cfg.step_size
            ? sample
            : nodes[nearest].position +
                  (sample - nodes[nearest].position) * (cfg.step_size / nearest_d);

    if (in_collision(new_pos, map) ||
        segment_in_collision(nodes[nearest].position, new_pos, map)) {
      if (trace) trace->best_cost_per_iteration.push_back(c_best);
      continue;
    }

    // --- choose minimum-cost parent among neighbors ---
    std::vector<int> neighbors;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if ((nodes[i].position - new_pos).norm() <= cfg.neighbor_radius)
        neighbors.push_back(static_cast<int>(i));

    int parent = nearest;
    double best_cost_via = nodes[nearest].cost + (new_pos - nodes[nearest].position).norm();
    for (int nb : neighbors) {
      if (nb == nearest) continue;
      const double via = nodes[nb].cost + (new_pos - nodes[nb].position).norm();
      if (via < best_cost_via && !segment_in_collision(nodes[nb].position, new_pos, map)) {
        best_cost_via = via;
        parent = nb;
      }
    }

    const int new_id = static_cast<int>(nodes.size());
    nodes.push_back({new_pos, parent, best_cost_via, {}});
    nodes[parent].children.push_back(new_id);
    if (trace) trace->accepted_samples.emplace_back(sample, best_goal >= 0 ? c_best : -1.0);

    // --- rewire neighbors through the new node when cheaper ---
    for (int nb : neighbors) {
      if (nb == parent || nb == 0) continue;
      const double via = best_cost_via + (nodes[nb].position - new_pos).norm();
      if (via + 1e-12 < nodes[nb].cost &&
          !segment_in_collision(new_pos, nodes[nb].position, map)) {
        auto& old_children = nodes[nodes[nb].parent].children;
        old_children.erase(std::find(old_children.begin(), old_children.end(), nb));
        const double delta = via - nodes[nb].cost;
        nodes[nb].parent = new_id;
        nodes[new_id].children.push_back(nb);
        propagate_cost(nb, delta);
      }
    }

    if ((new_pos - goal).norm() <= cfg.goal_tolerance) goal_nodes.push_back(new_id);
    refresh_best();
    if (trace) trace->best_cost_per_iteration.push_back(c_best);
  }

  if (trace) {
    for (const auto& n : nodes) {
      trace->node_positions.push_back(n.position);
      trace->node_parents.push_back(n.parent);
      trace->node_costs.push_back(n.cost);
    }
  }

  if (best_goal < 0) return std::nullopt;

  std::vector<Eigen::Vector3d> positions;
  for (int id = best_goal; id >= 0; id = nodes[id].parent) positions.push_back(nodes[id].position);
  std::reverse(positions.begin(), positions.end());
  // close the remaining gap to the exact goal when the hop is free
  if ((positions.back() - goal).norm() > 1e-12 &&
      !segment_in_collision(positions.back(), goal, map))
    positions.push_back(goal);

  WaypointPath path;
  const std::vector<double> yaw = heading_profile(positions);
  for (std::size_t i = 0; i < positions.size(); ++i)
    path.waypoints.push_back({positions[i], yaw[i]});
  path.recompute_length();
  return path;
}

/// Shortcut smoothing: greedily replace waypoint subchains with the farthest
/// collision-free direct segment, repeated to a fixed point, then re-subdivide
/// long segments so consecutive spacing stays below the tracking envelope.
inline WaypointPath smooth_path(const WaypointPath& input, const ForestMap& map) {
  if (input.waypoints.size() < 2) return input;

  std::vector<Eigen::Vector3d> pts;
  for (const auto& w : input.waypoints) pts.push_back(w.position);

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Eigen::Vector3d> out{pts.front()};
    std::size_t i = 0;
    while (i + 1 < pts.size()) {
      std::size_t j = pts.size() - 1;
      while (j > i + 1 && segment_in_collision(pts[i], pts[j], map)) --j;
      out.push_back(pts[j]);
      if (j > i + 1) changed = true;
      i = j;
    }
    pts = std::move(out);
  }

  // re-subdivide to keep consecutive spacing under the envelope
  std::vector<Eigen::Vector3d> spaced{pts.front()};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Eigen::Vector3d d = pts[i + 1] - pts[i];
    const double len = d.norm();
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / (kMaxWaypointSpacing - 0.1))));
    for (int k = 1; k <= pieces; ++k)
      spaced.push_back(pts[i] + d * (static_cast<double>(k) / pieces));
  }

  WaypointPath out;
  const std::vector<double> yaw =
      heading_profile(spaced, input.waypoints.back().yaw_deg);
  for (std::size_t i = 0; i < spaced.size(); ++i) out.waypoints.push_back({spaced[i], yaw[i]});
  out.recompute_length();
  return out;
}

/// Attach a goal yaw to the final waypoint and refresh intermediate headings.
inline WaypointPath with_final_yaw(const WaypointPath& input, double final_yaw_deg) {
  std::vector<Eigen::Vector3d> pts;
  for (const auto& w : input.waypoints) pts.push_back(w.position);
  WaypointPath out;
  const std::vector<double> yaw = heading_profile(pts, wrap_deg(final_yaw_deg));
  for (std::size_t i = 0; i < pts.size(); ++i) out.waypoints.push_back({pts[i], yaw[i]});
  out.length = input.length;
  return out;
}

}  // namespace canopy
