#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "canopy/env.hpp"

namespace canopy {

constexpr int kMaxTourTargets = 10;       // factorial enumeration guard
constexpr double kTargetSwitchRadius = 1.0;  // m, publish next target inside this

struct TourPlan {
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  std::vector<ViewPoseRef> targets;  // visit order
  std::vector<int> order;            // indices into the input target list
  std::vector<double> leg_costs;     // n+1 legs, includes the return leg
  double total_cost = 0.0;
};

inline double planar_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return (a.head<2>() - b.head<2>()).norm();
}

/// Closed-tour cost: planar Euclidean legs start -> targets... -> start.
/// Altitude and yaw do not contribute.
inline double tour_cost(const Eigen::Vector3d& start, const std::vector<ViewPoseRef>& ordered) {
  if (ordered.empty()) throw std::invalid_argument("tour_cost: need at least one target");
  double cost = planar_distance(start, ordered.front().position);
  for (std::size_t i = 0; i + 1 < ordered.size(); ++i)
    cost += planar_distance(ordered[i].position, ordered[i + 1].position);
  cost += planar_distance(ordered.back().position, start);
  return cost;
}

/// Exhaustive enumeration of all |targets|! orderings; returns the minimum
/// total-cost closed tour. Ties keep the lexicographically smallest index
/// sequence (permutations are visited in lexicographic order).
inline TourPlan plan_tour(const Eigen::Vector3d& start, const std::vector<ViewPoseRef>& targets) {
  const int n = static_cast<int>(targets.size());
  if (n < 1) throw std::invalid_argument("plan_tour: need at least one target");
  if (n > kMaxTourTargets)
    throw std::invalid_argument("plan_tour: more than " + std::to_string(kMaxTourTargets) +
                                " targets (exhaustive enumeration)");

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm;
  double best_cost = std::numeric_limits<double>::infinity();

  std::vector<ViewPoseRef> ordered(n);
  do {
    for (int i = 0; i < n; ++i) ordered[i] = targets[perm[i]];
    const double cost = tour_cost(start, ordered);
    if (cost < best_cost) {
      best_cost = cost;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  TourPlan plan;
  plan.start = start;
  plan.order = best_perm;
  plan.total_cost = best_cost;
  for (int idx : best_perm) plan.targets.push_back(targets[idx]);
  plan.leg_costs.push_back(planar_distance(start, plan.targets.front().position));
  for (int i = 0; i + 1 < n; ++i)
    plan.leg_costs.push_back(planar_distance(plan.targets[i].position, plan.targets[i + 1].position));
  plan.leg_costs.push_back(planar_distance(plan.targets.back().position, start));
  return plan;
}

struct TargetQuery {
  std::optional<ViewPoseRef> target;  // nullopt: tour complete
  std::size_t index = 0;              // progress index after the query
};

/// Target publisher: advances to the next target once the odometry is within
/// one meter (full 3D distance) of the current one.
inline TargetQuery next_target(const Eigen::Vector3d& odometry_position, const TourPlan& plan,
                               std::size_t progress_index) {
  const std::size_t n = plan.targets.size();
  if (progress_index > n) throw std::invalid_argument("next_target: progress index out of range");
  if (progress_index == n) return TargetQuery{std::nullopt, n};

  const double dist = (odometry_position - plan.targets[progress_index].position).norm();
  if (dist < kTargetSwitchRadius) {
    const std::size_t next = progress_index + 1;
    if (next == n) return TargetQuery{std::nullopt, n};
    return TargetQuery{plan.targets[next], next};
  }
  return TargetQuery{plan.targets[progress_index], progress_index};
}

}  // namespace canopy
