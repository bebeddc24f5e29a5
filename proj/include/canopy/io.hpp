#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "canopy/env.hpp"
#include "canopy/forest_map.hpp"
#include "canopy/ppo.hpp"
#include "canopy/quadrotor.hpp"
#include "canopy/reference.hpp"
#include "canopy/rrt_star.hpp"
#include "canopy/tsp.hpp"

namespace canopy {

namespace detail {

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

inline void write_json_file(const nlohmann::json& j, const std::string& path, int indent = 2) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(indent) << "\n";
}

}  // namespace detail

// Physical parameters: flat key/value JSON, SI units. Missing keys keep the
// embedded defaults.
inline PhysicalParams load_physical_params(const std::string& path) {
  const nlohmann::json j = detail::read_json_file(path);
  PhysicalParams p;
  p.mass = j.value("mass", p.mass);
  p.arm_length = j.value("arm_length", p.arm_length);
  p.thrust_coeff = j.value("thrust_coeff", p.thrust_coeff);
  p.moment_coeff = j.value("moment_coeff", p.moment_coeff);
  p.propeller_radius = j.value("propeller_radius", p.propeller_radius);
  p.gravity = j.value("gravity", p.gravity);
  if (j.contains("inertia_diagonal")) {
    const auto v = j.at("inertia_diagonal").get<std::vector<double>>();
    if (v.size() != 3) throw std::runtime_error("inertia_diagonal: need 3 values");
    p.inertia_diagonal = Eigen::Vector3d(v[0], v[1], v[2]);
  }
  p.validate();
  return p;
}

inline void save_physical_params(const PhysicalParams& p, const std::string& path) {
  nlohmann::json j{
      {"mass", p.mass},
      {"arm_length", p.arm_length},
      {"thrust_coeff", p.thrust_coeff},
      {"moment_coeff", p.moment_coeff},
      {"propeller_radius", p.propeller_radius},
      {"gravity", p.gravity},
      {"inertia_diagonal",
       {p.inertia_diagonal.x(), p.inertia_diagonal.y(), p.inertia_diagonal.z()}}};
  detail::write_json_file(j, path);
}

// Forest map: {bounds, inflation_radius, obstacles: [{x, y, radius, z_min, z_max}]}
inline nlohmann::json map_to_json(const ForestMap& map) {
  nlohmann::json j;
  j["bounds"] = {{"min", {map.bounds.min.x(), map.bounds.min.y(), map.bounds.min.z()}},
                 {"max", {map.bounds.max.x(), map.bounds.max.y(), map.bounds.max.z()}}};
  j["inflation_radius"] = map.inflation_radius;
  j["obstacles"] = nlohmann::json::array();
  for (const auto& o : map.obstacles)
    j["obstacles"].push_back({{"x", o.x},
                              {"y", o.y},
                              {"radius", o.radius},
                              {"z_min", o.z_min},
                              {"z_max", o.z_max}});
  return j;
}

inline ForestMap map_from_json(const nlohmann::json& j) {
  ForestMap map;
  const auto bmin = j.at("bounds").at("min").get<std::vector<double>>();
  const auto bmax = j.at("bounds").at("max").get<std::vector<double>>();
  if (bmin.size() != 3 || bmax.size() != 3) throw std::runtime_error("bounds: need 3 values");
  map.bounds.min = Eigen::Vector3d(bmin[0], bmin[1], bmin[2]);
  map.bounds.max = Eigen::Vector3d(bmax[0], bmax[1], bmax[2]);
  map.inflation_radius = j.at("inflation_radius").get<double>();
  for (const auto& jo : j.at("obstacles")) {
    CylinderObstacle o{jo.at("x").get<double>(), jo.at("y").get<double>(),
                       jo.at("radius").get<double>(), jo.at("z_min").get<double>(),
                       jo.at("z_max").get<double>()};
    o.validate();
    map.obstacles.push_back(o);
  }
  return map;
}

inline void save_map(const ForestMap& map, const std::string& path) {
  detail::write_json_file(map_to_json(map), path);
}
inline ForestMap load_map(const std::string& path) {
  return map_from_json(detail::read_json_file(path));
}

// Inspection targets: [{x, y, z, yaw_deg}]
inline std::vector<ViewPoseRef> targets_from_json(const nlohmann::json& j) {
  std::vector<ViewPoseRef> targets;
  for (const auto& jt : j)
    targets.push_back(make_view_pose(
        Eigen::Vector3d(jt.at("x").get<double>(), jt.at("y").get<double>(),
                        jt.at("z").get<double>()),
        jt.at("yaw_deg").get<double>()));
  return targets;
}

inline std::vector<ViewPoseRef> load_targets(const std::string& path) {
  return targets_from_json(detail::read_json_file(path));
}

inline void save_targets(const std::vector<ViewPoseRef>& targets, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : targets)
    j.push_back({{"x", t.position.x()},
                 {"y", t.position.y()},
                 {"z", t.position.z()},
                 {"yaw_deg", t.yaw_deg}});
  detail::write_json_file(j, path);
}

// Tour: ordered index list plus costs.
inline nlohmann::json tour_to_json(const TourPlan& plan) {
  return nlohmann::json{{"start", {plan.start.x(), plan.start.y(), plan.start.z()}},
                        {"order", plan.order},
                        {"leg_costs", plan.leg_costs},
                        {"total_cost", plan.total_cost}};
}

inline void save_tour_json(const TourPlan& plan, const std::string& path) {
  detail::write_json_file(tour_to_json(plan), path);
}

// Waypoint path: JSON with per-waypoint yaw, or CSV (x,y,z,yaw_deg).
inline void save_path_json(const WaypointPath& path, const std::string& file) {
  nlohmann::json j;
  j["length"] = path.length;
  j["waypoints"] = nlohmann::json::array();
  for (const auto& w : path.waypoints)
    j["waypoints"].push_back({{"x", w.position.x()},
                              {"y", w.position.y()},
                              {"z", w.position.z()},
                              {"yaw_deg", w.yaw_deg}});
  detail::write_json_file(j, file);
}

inline WaypointPath load_path_json(const std::string& file) {
  const nlohmann::json j = detail::read_json_file(file);
  WaypointPath path;
  for (const auto& jw : j.at("waypoints"))
    path.waypoints.push_back(
        {Eigen::Vector3d(jw.at("x").get<double>(), jw.at("y").get<double>(),
                         jw.at("z").get<double>()),
         jw.at("yaw_deg").get<double>()});
  path.length = j.at("length").get<double>();
  return path;
}

inline void save_path_csv(const WaypointPath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file);
  out.precision(17);
  out << "x,y,z,yaw_deg\n";
  for (const auto& w : path.waypoints)
    out << w.position.x() << ',' << w.position.y() << ',' << w.position.z() << ',' << w.yaw_deg
        << '\n';
}

// Reference stream CSV: t,x,y,z,yaw_deg
inline void save_stream_csv(const ReferenceStream& s, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file);
  out.precision(17);
  out << "t,x,y,z,yaw_deg\n";
  for (std::size_t k = 0; k < s.samples.size(); ++k)
    out << s.time_at(k) << ',' << s.samples[k].position.x() << ',' << s.samples[k].position.y()
        << ',' << s.samples[k].position.z() << ',' << s.samples[k].yaw_deg << '\n';
}

// Learning curve CSV: env_steps,mean_episode_reward
inline void save_curve_csv(const LearningCurve& curve, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file);
  out.precision(17);
  out << "env_steps,mean_episode_reward\n";
  for (const auto& [steps, reward] : curve.points) out << steps << ',' << reward << '\n';
}

}  // namespace canopy
