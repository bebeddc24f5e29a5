#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>

#include "canopy/forest_map.hpp"

namespace canopy {

struct ForestConfig {
  double area_x = 20.0, area_y = 20.0;  // m, centered on the origin
  int trunk_count = 200;
  double radius_min = 0.15, radius_max = 0.25;
  double trunk_height = 2.0;
  double spacing_min = 1.0, spacing_max = 2.0;  // center-to-center, nearest neighbor
  double workspace_z_min = 0.1, workspace_z_max = 1.9;
  double inflation_radius = 0.3;
  uint64_t seed = 0;
  long max_attempts = 4'000'000;

  void validate() const {
    if (trunk_count < 1 || !(area_x > 0.0) || !(area_y > 0.0) ||
        !(radius_min > 0.0) || !(radius_max >= radius_min) ||
        !(spacing_min > 0.0) || !(spacing_max >= spacing_min) ||
        !(trunk_height > 0.0) || !(workspace_z_min < workspace_z_max))
      throw std::invalid_argument("ForestConfig: infeasible parameters");
  }
};

/// Rejection-sampled trunk placement. Each new trunk must keep at least
/// spacing_min from every existing center and, after the first, sit within
/// spacing_max of its nearest neighbor so the stand stays contiguous.
/// Deterministic per rng state.
inline ForestMap generate_forest(const ForestConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  std::uniform_real_distribution<double> ux(-0.5 * cfg.area_x, 0.5 * cfg.area_x);
  std::uniform_real_distribution<double> uy(-0.5 * cfg.area_y, 0.5 * cfg.area_y);
  std::uniform_real_distribution<double> ur(cfg.radius_min, cfg.radius_max);

  ForestMap map;
  map.inflation_radius = cfg.inflation_radius;
  map.bounds.min = Eigen::Vector3d(-0.5 * cfg.area_x, -0.5 * cfg.area_y, cfg.workspace_z_min);
  map.bounds.max = Eigen::Vector3d(0.5 * cfg.area_x, 0.5 * cfg.area_y, cfg.workspace_z_max);

  long attempts = 0;
  while (static_cast<int>(map.obstacles.size()) < cfg.trunk_count) {
    if (++attempts > cfg.max_attempts)
      throw std::runtime_error("generate_forest: placement failed; infeasible config");
    const double x = ux(rng), y = uy(rng);
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& t : map.obstacles) {
      const double dx = x - t.x, dy = y - t.y;
      nearest = std::min(nearest, std::sqrt(dx * dx + dy * dy));
    }
    if (nearest < cfg.spacing_min) continue;
    if (!map.obstacles.empty() && nearest > cfg.spacing_max) continue;
    map.obstacles.push_back(CylinderObstacle{x, y, ur(rng), 0.0, cfg.trunk_height});
  }
  return map;
}

inline ForestMap generate_forest(const ForestConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  return generate_forest(cfg, rng);
}

/// Seeded sampling of a collision-free position with extra clearance beyond
/// the map inflation. Used to pick feasible starts and targets in generated
/// forests.
inline Eigen::Vector3d sample_free_position(const ForestMap& map, double extra_clearance,
                                            double z_lo, double z_hi, std::mt19937_64& rng,
                                            int max_tries = 100000) {
  std::uniform_real_distribution<double> ux(map.bounds.min.x(), map.bounds.max.x());
  std::uniform_real_distribution<double> uy(map.bounds.min.y(), map.bounds.max.y());
  std::uniform_real_distribution<double> uz(z_lo, z_hi);
  for (int i = 0; i < max_tries; ++i) {
    const Eigen::Vector3d p(ux(rng), uy(rng), uz(rng));
    if (!in_collision(p, map, map.inflation_radius + extra_clearance)) return p;
  }
  throw std::runtime_error("sample_free_position: no free position found");
}

}  // namespace canopy
