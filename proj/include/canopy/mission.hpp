#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "canopy/angles.hpp"
#include "canopy/env.hpp"
#include "canopy/executor.hpp"
#include "canopy/forest_gen.hpp"
#include "canopy/forest_map.hpp"
#include "canopy/reference.hpp"
#include "canopy/rrt_star.hpp"
#include "canopy/tsp.hpp"

namespace canopy {

enum class PhaseKind { Transit, Settle, Hold, Scan, Circle, Helix };

inline const char* to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::Transit: return "transit";
    case PhaseKind::Settle: return "settle";
    case PhaseKind::Hold: return "hold";
    case PhaseKind::Scan: return "scan";
    case PhaseKind::Circle: return "circle";
    case PhaseKind::Helix: return "helix";
  }
  return "unknown";
}

struct MissionTarget {
  ViewPoseRef pose;
  std::optional<ReferenceStream> behavior;  // executed after arriving at the pose
  PhaseKind behavior_kind = PhaseKind::Hold;
};

struct StepRecord {
  double t = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond attitude{1, 0, 0, 0};
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d angular_velocity = Eigen::Vector3d::Zero();
  ViewPoseRef reference;
  Eigen::Vector4d action = Eigen::Vector4d::Zero();
  Eigen::Vector4d rpm = Eigen::Vector4d::Zero();
  RewardBreakdown reward;
  int target_index = -1;
  int phase_id = -1;
};

struct PhaseInfo {
  int id = 0;
  PhaseKind kind = PhaseKind::Transit;
  int target_index = -1;
  std::size_t first_step = 0;  // [first_step, end_step)
  std::size_t end_step = 0;
};

struct MissionSummary {
  int targets_total = 0;
  int targets_visited = 0;
  int collision_count = 0;  // against un-inflated trunks
  double planned_path_length = 0.0;
  double flight_time = 0.0;
  bool success = false;
  std::string failure_reason;
};

struct MissionLog {
  double dt = kControlDt;
  std::vector<StepRecord> steps;
  std::vector<PhaseInfo> phases;
  MissionSummary summary;
};

struct MissionConfig {
  PhysicalParams params;
  NoiseConfig noise;
  RRTConfig rrt;
  double cruise_speed = 1.0;
  double switch_radius = kTargetSwitchRadius;
  double settle_position_tol = 0.08;
  double settle_speed_tol = 0.15;
  double settle_timeout = 6.0;   // s
  double arrival_timeout = 5.0;  // s of holding the path end before giving up
  Eigen::Vector3d start{0.0, 0.0, 1.0};
  double start_yaw_deg = 0.0;
  bool policy_observation_noise = false;
  double position_bound = 3.0;  // controller failure bound vs the active reference
  long max_steps = 400000;
  int plan_attempts = 3;
  uint64_t seed = 0;
};

/// Point-in-trunk test against the physical (un-inflated) cylinders only;
/// workspace bounds do not count as collisions here.
inline bool in_trunk_collision(const Eigen::Vector3d& p, const ForestMap& map) {
  for (const auto& obs : map.obstacles) {
    if (p.z() < obs.z_min || p.z() > obs.z_max) continue;
    const double dx = p.x() - obs.x, dy = p.y() - obs.y;
    if (dx * dx + dy * dy <= obs.radius * obs.radius) return true;
  }
  return false;
}

namespace detail {

class MissionRunner {
 public:
  MissionRunner(const ForestMap& map, Executor& executor, const MissionConfig& cfg)
      : map_(map), executor_(executor), cfg_(cfg),
        env_(make_env_config(cfg), cfg.seed ^ 0xC0FFEE123456789ULL) {
    QuadrotorState s;
    s.position = cfg.start;
    s.attitude = yaw_quaternion(cfg.start_yaw_deg);
    obs_ = env_.reset_at(s, make_view_pose(cfg.start, cfg.start_yaw_deg));
    executor_.reset();
  }

  MissionLog run(const std::vector<MissionTarget>& targets) {
    log_.summary.targets_total = static_cast<int>(targets.size());
    if (targets.empty()) {
      log_.summary.success = true;
      return finish();
    }

    std::vector<ViewPoseRef> poses;
    for (const auto& t : targets) poses.push_back(t.pose);
    const TourPlan tour = plan_tour(cfg_.start, poses);

    for (std::size_t leg = 0; leg < tour.order.size(); ++leg) {
      const MissionTarget& target = targets[tour.order[leg]];
      const int target_idx = tour.order[leg];
      if (!fly_leg(target.pose, target_idx)) return finish();
      ++log_.summary.targets_visited;

      if (target.behavior) {
        if (!settle_at(target.behavior->samples.front(), target_idx)) return finish();
        if (!track_stream(*target.behavior, target.behavior_kind, target_idx,
                          /*switch_target=*/nullptr))
          return finish();
      }
    }
    log_.summary.success = log_.summary.collision_count == 0;
    return finish();
  }

 private:
  static EnvConfig make_env_config(const MissionConfig& cfg) {
    EnvConfig ec;
    ec.params = cfg.params;
    ec.noise = cfg.noise;
    ec.limits.horizon = std::numeric_limits<int>::max() / 2;  // mission controls duration
    ec.limits.position_bound = cfg.position_bound;
    ec.observation_noise = cfg.policy_observation_noise;
    return ec;
  }

  MissionLog finish() {
    log_.summary.flight_time = static_cast<double>(log_.steps.size()) * log_.dt;
    return log_;
  }

  bool fail(const std::string& reason) {
    log_.summary.failure_reason = reason;
    log_.summary.success = false;
    return false;
  }

  /// Plan, smooth and track one point-to-point leg; arrival is the 1 m
  /// target-switch rule.
  bool fly_leg(const ViewPoseRef& goal, int target_idx) {
    Eigen::Vector3d plan_start = env_.state().position;
    if (in_collision(plan_start, map_))
      plan_start = env_.reference().position;  // reference is always in free space

    std::optional<WaypointPath> path;
    for (int attempt = 0; attempt < cfg_.plan_attempts && !path; ++attempt) {
      RRTConfig rc = cfg_.rrt;
      rc.seed = cfg_.seed * 1000 + static_cast<uint64_t>(target_idx) * 10 + attempt;
      rc.max_iterations = cfg_.rrt.max_iterations * (attempt + 1);
      path = plan_path(plan_start, goal.position, map_, rc);
    }
    if (!path) return fail("no path to target " + std::to_string(target_idx));

    WaypointPath smoothed = with_final_yaw(smooth_path(*path, map_), goal.yaw_deg);
    log_.summary.planned_path_length += smoothed.length;
    const ReferenceStream stream = path_to_stream(smoothed, cfg_.cruise_speed);

    const ViewPoseRef* switch_target = &goal;
    if (!track_stream(stream, PhaseKind::Transit, target_idx, switch_target)) return false;
    if (switched_) return true;

    // stream exhausted outside the switch radius: hold the path end briefly
    const ReferenceStream hold = gen_hold(stream.samples.back(), cfg_.arrival_timeout);
    if (!track_stream(hold, PhaseKind::Transit, target_idx, switch_target)) return false;
    if (!switched_) return fail("target " + std::to_string(target_idx) + " not reached");
    return true;
  }

  /// Hold the given pose until position and speed settle (or timeout).
  bool settle_at(const ViewPoseRef& pose, int target_idx) {
    const long max_steps = static_cast<long>(cfg_.settle_timeout / log_.dt);
    begin_phase(PhaseKind::Settle, target_idx);
    for (long i = 0; i < max_steps; ++i) {
      if (!control_step(pose, Eigen::Vector3d::Zero(), 0.0, target_idx)) return false;
      const bool settled =
          (env_.state().position - pose.position).norm() < cfg_.settle_position_tol &&
          env_.state().linear_velocity.norm() < cfg_.settle_speed_tol;
      if (settled) break;
    }
    end_phase();
    return true;
  }

  /// Track every sample of a stream at 100 Hz. With a switch target, stops
  /// (successfully) at the first step inside the switch radius.
  bool track_stream(const ReferenceStream& stream, PhaseKind kind, int target_idx,
                    const ViewPoseRef* switch_target) {
    switched_ = false;
    begin_phase(kind, target_idx);
    for (std::size_t i = 0; i < stream.samples.size(); ++i) {
      const ViewPoseRef& ref = stream.samples[i];
      Eigen::Vector3d v_ff = Eigen::Vector3d::Zero();
      double yaw_rate_ff = 0.0;
      if (i + 1 < stream.samples.size()) {
        v_ff = (stream.samples[i + 1].position - ref.position) / stream.dt;
        yaw_rate_ff = deg2rad(ang_diff_deg(stream.samples[i + 1].yaw_deg, ref.yaw_deg)) / stream.dt;
      }
      if (!control_step(ref, v_ff, yaw_rate_ff, target_idx)) return false;
      if (switch_target &&
          (env_.state().position - switch_target->position).norm() < cfg_.switch_radius) {
        switched_ = true;
        break;
      }
    }
    end_phase();
    return true;
  }

  bool control_step(const ViewPoseRef& ref, const Eigen::Vector3d& v_ff, double yaw_rate_ff,
                    int target_idx) {
    if (static_cast<long>(log_.steps.size()) >= cfg_.max_steps)
      return fail("mission step budget exceeded");

    env_.set_reference(ref);
    ExecutorContext ctx{ref, v_ff, Eigen::Vector3d::Zero(), yaw_rate_ff};
    const Eigen::Vector4d action = executor_.act(obs_, env_.state(), ctx);
    const Eigen::Vector4d rpm = action_to_rpm(action, cfg_.params);
    const StepResult res = env_.step(action);
    obs_ = res.observation;

    StepRecord rec;
    rec.t = static_cast<double>(log_.steps.size()) * log_.dt;
    rec.position = env_.state().position;
    rec.attitude = env_.state().attitude;
    rec.velocity = env_.state().linear_velocity;
    rec.angular_velocity = env_.state().angular_velocity;
    rec.reference = ref;
    rec.action = action;
    rec.rpm = rpm;
    rec.reward = res.reward;
    rec.target_index = target_idx;
    rec.phase_id = current_phase_;
    log_.steps.push_back(rec);

    if (in_trunk_collision(env_.state().position, map_)) {
      ++log_.summary.collision_count;
      return fail("collision with trunk");
    }
    if (res.status != TerminationStatus::Running &&
        res.status != TerminationStatus::TimeLimit)
      return fail(std::string("controller failure: ") + to_string(res.status));
    return true;
  }

  void begin_phase(PhaseKind kind, int target_idx) {
    PhaseInfo p;
    p.id = static_cast<int>(log_.phases.size());
    p.kind = kind;
    p.target_index = target_idx;
    p.first_step = log_.steps.size();
    log_.phases.push_back(p);
    current_phase_ = p.id;
  }

  void end_phase() {
    log_.phases[current_phase_].end_step = log_.steps.size();
    current_phase_ = -1;
  }

  const ForestMap& map_;
  Executor& executor_;
  MissionConfig cfg_;
  InspectionEnv env_;
  Observation obs_;
  MissionLog log_;
  int current_phase_ = -1;
  bool switched_ = false;
};

}  // namespace detail

/// Full mission: exhaustive tour over the targets, RRT* legs, 100 Hz
/// closed-loop tracking with the 1 m switch rule, then each target's
/// inspection behavior. Aborts (with a partial log) on planner failure,
/// controller failure or physical trunk collision.
inline MissionLog run_mission(const ForestMap& map, const std::vector<MissionTarget>& targets,
                              Executor& executor, const MissionConfig& cfg) {
  if (in_collision(cfg.start, map))
    throw std::invalid_argument("run_mission: start position in collision");
  for (const auto& t : targets)
    if (in_collision(t.pose.position, map))
      throw std::invalid_argument("run_mission: target in collision");
  detail::MissionRunner runner(map, executor, cfg);
  MissionLog log = runner.run(targets);
  // a phase left open by an abort still gets a valid range
  for (auto& p : log.phases)
    if (p.end_step < p.first_step) p.end_step = log.steps.size();
  if (!log.phases.empty() && log.phases.back().end_step == 0)
    log.phases.back().end_step = log.steps.size();
  return log;
}

inline MissionLog run_mission(const ForestMap& map, const std::vector<ViewPoseRef>& targets,
                              Executor& executor, const MissionConfig& cfg) {
  std::vector<MissionTarget> full;
  for (const auto& p : targets) full.push_back(MissionTarget{p, std::nullopt, PhaseKind::Hold});
  return run_mission(map, full, executor, cfg);
}

// --- log metrics ----------------------------------------------------------

inline double phase_position_rms(const MissionLog& log, int phase_id) {
  const auto& ph = log.phases.at(phase_id);
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = ph.first_step; i < ph.end_step; ++i) {
    sq += (log.steps[i].position - log.steps[i].reference.position).squaredNorm();
    ++n;
  }
  return n == 0 ? 0.0 : std::sqrt(sq / static_cast<double>(n));
}

inline double phase_mean_standoff_error(const MissionLog& log, int phase_id,
                                        const Eigen::Vector2d& center, double ring_radius) {
  const auto& ph = log.phases.at(phase_id);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = ph.first_step; i < ph.end_step; ++i) {
    const double d = (log.steps[i].position.head<2>() - center).norm();
    sum += std::abs(d - ring_radius);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Largest deviation between the vehicle yaw and the bearing toward a trunk
/// center across a phase.
inline double phase_max_bearing_error_deg(const MissionLog& log, int phase_id,
                                          const Eigen::Vector2d& center) {
  const auto& ph = log.phases.at(phase_id);
  double worst = 0.0;
  for (std::size_t i = ph.first_step; i < ph.end_step; ++i) {
    const auto& s = log.steps[i];
    const double yaw = rad2deg(std::atan2(
        2.0 * (s.attitude.w() * s.attitude.z() + s.attitude.x() * s.attitude.y()),
        1.0 - 2.0 * (s.attitude.y() * s.attitude.y() + s.attitude.z() * s.attitude.z())));
    const double bearing = yaw_facing_deg(s.position.head<2>(), center);
    worst = std::max(worst, std::abs(ang_diff_deg(yaw, bearing)));
  }
  return worst;
}

/// Re-audit a log against the physical trunks; true when every logged
/// position is clear.
inline bool log_clear_of_trunks(const MissionLog& log, const ForestMap& map) {
  for (const auto& s : log.steps)
    if (in_trunk_collision(s.position, map)) return false;
  return true;
}

// --- scenarios -------------------------------------------------------------

enum class ScenarioName { ForestNav, ViewPoses, Scan, Circle, Helix };

inline ScenarioName scenario_from_string(const std::string& s) {
  if (s == "forest_nav") return ScenarioName::ForestNav;
  if (s == "view_poses") return ScenarioName::ViewPoses;
  if (s == "scan") return ScenarioName::Scan;
  if (s == "circle") return ScenarioName::Circle;
  if (s == "helix") return ScenarioName::Helix;
  throw std::invalid_argument("unknown scenario: " + s);
}

inline const char* to_string(ScenarioName n) {
  switch (n) {
    case ScenarioName::ForestNav: return "forest_nav";
    case ScenarioName::ViewPoses: return "view_poses";
    case ScenarioName::Scan: return "scan";
    case ScenarioName::Circle: return "circle";
    case ScenarioName::Helix: return "helix";
  }
  return "unknown";
}

struct ScenarioConfig {
  uint64_t seed = 0;
  MissionConfig mission;
  ForestConfig forest;       // forest_nav
  int episode_horizon = 1500;  // for episodic (hover) evaluation
  int forest_target_count = 8;
  double target_clearance = 0.35;  // extra margin beyond inflation for sampled targets
  double target_min_separation = 2.5;

  double scan_rate_deg = 36.0;
  double circle_rate_deg = 36.0;
  double circle_revolutions = 1.0;
  double circle_altitude = 1.2;
  double helix_rate_deg = 45.0;
  double helix_climb_rate = 0.1;
  double helix_z_start = 0.8, helix_z_end = 1.6;
  double hold_duration = 2.0;
  double view_pose_standoff = 1.0;
  TrunkSpec behavior_trunk{Eigen::Vector2d(1.5, 0.0), 0.2, 0.5};
};

struct ScenarioSetup {
  ForestMap map;
  std::vector<MissionTarget> targets;
  MissionConfig mission;
};

/// Apply a scenario config file on top of the defaults. All keys optional.
inline ScenarioConfig scenario_config_from_json(const nlohmann::json& j,
                                                ScenarioConfig cfg = ScenarioConfig{}) {
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    cfg.mission.noise.sigma_p = n.value("sigma_p", cfg.mission.noise.sigma_p);
    cfg.mission.noise.sigma_q = n.value("sigma_q", cfg.mission.noise.sigma_q);
    cfg.mission.noise.sigma_v = n.value("sigma_v", cfg.mission.noise.sigma_v);
    cfg.mission.noise.sigma_w = n.value("sigma_w", cfg.mission.noise.sigma_w);
  }
  cfg.mission.position_bound = j.value("position_bound", cfg.mission.position_bound);
  cfg.episode_horizon = j.value("horizon", cfg.episode_horizon);
  cfg.mission.cruise_speed = j.value("cruise_speed", cfg.mission.cruise_speed);
  cfg.mission.switch_radius = j.value("switch_radius", cfg.mission.switch_radius);
  cfg.mission.policy_observation_noise =
      j.value("policy_observation_noise", cfg.mission.policy_observation_noise);
  if (j.contains("rrt")) {
    const auto& r = j.at("rrt");
    cfg.mission.rrt.step_size = r.value("step_size", cfg.mission.rrt.step_size);
    cfg.mission.rrt.neighbor_radius = r.value("neighbor_radius", cfg.mission.rrt.neighbor_radius);
    cfg.mission.rrt.max_iterations = r.value("max_iterations", cfg.mission.rrt.max_iterations);
    cfg.mission.rrt.goal_bias = r.value("goal_bias", cfg.mission.rrt.goal_bias);
    cfg.mission.rrt.goal_tolerance = r.value("goal_tolerance", cfg.mission.rrt.goal_tolerance);
  }
  if (j.contains("forest")) {
    const auto& f = j.at("forest");
    cfg.forest.area_x = f.value("area_x", cfg.forest.area_x);
    cfg.forest.area_y = f.value("area_y", cfg.forest.area_y);
    cfg.forest.trunk_count = f.value("trunk_count", cfg.forest.trunk_count);
    cfg.forest.radius_min = f.value("radius_min", cfg.forest.radius_min);
    cfg.forest.radius_max = f.value("radius_max", cfg.forest.radius_max);
    cfg.forest.trunk_height = f.value("trunk_height", cfg.forest.trunk_height);
    cfg.forest.spacing_min = f.value("spacing_min", cfg.forest.spacing_min);
    cfg.forest.spacing_max = f.value("spacing_max", cfg.forest.spacing_max);
    cfg.forest.inflation_radius = f.value("inflation_radius", cfg.forest.inflation_radius);
  }
  cfg.forest_target_count = j.value("forest_target_count", cfg.forest_target_count);
  cfg.scan_rate_deg = j.value("scan_rate_deg", cfg.scan_rate_deg);
  cfg.circle_rate_deg = j.value("circle_rate_deg", cfg.circle_rate_deg);
  cfg.circle_revolutions = j.value("circle_revolutions", cfg.circle_revolutions);
  cfg.circle_altitude = j.value("circle_altitude", cfg.circle_altitude);
  cfg.helix_rate_deg = j.value("helix_rate_deg", cfg.helix_rate_deg);
  cfg.helix_climb_rate = j.value("helix_climb_rate", cfg.helix_climb_rate);
  cfg.helix_z_start = j.value("helix_z_start", cfg.helix_z_start);
  cfg.helix_z_end = j.value("helix_z_end", cfg.helix_z_end);
  cfg.hold_duration = j.value("hold_duration", cfg.hold_duration);
  cfg.view_pose_standoff = j.value("view_pose_standoff", cfg.view_pose_standoff);
  if (j.contains("behavior_trunk")) {
    const auto& t = j.at("behavior_trunk");
    cfg.behavior_trunk.center.x() = t.value("x", cfg.behavior_trunk.center.x());
    cfg.behavior_trunk.center.y() = t.value("y", cfg.behavior_trunk.center.y());
    cfg.behavior_trunk.radius = t.value("radius", cfg.behavior_trunk.radius);
    cfg.behavior_trunk.standoff = t.value("standoff", cfg.behavior_trunk.standoff);
  }
  return cfg;
}

namespace detail {

inline ForestMap small_map(double half_x, double half_y,
                           std::vector<CylinderObstacle> trunks = {}) {
  ForestMap map;
  map.obstacles = std::move(trunks);
  map.bounds.min = Eigen::Vector3d(-half_x, -half_y, 0.1);
  map.bounds.max = Eigen::Vector3d(half_x, half_y, 1.9);
  map.inflation_radius = 0.3;
  return map;
}

inline ScenarioSetup build_forest_nav(const ScenarioConfig& cfg) {
  ScenarioSetup setup;
  ForestConfig fc = cfg.forest;
  fc.seed = cfg.seed;
  setup.map = generate_forest(fc);

  std::mt19937_64 rng(cfg.seed ^ 0xFEEDFACE12345ULL);
  std::uniform_real_distribution<double> uyaw(-180.0, 180.0);

  std::vector<Eigen::Vector3d> points;
  points.push_back(sample_free_position(setup.map, cfg.target_clearance, 0.9, 1.1, rng));
  while (points.size() < static_cast<std::size_t>(cfg.forest_target_count) + 1) {
    const Eigen::Vector3d p = sample_free_position(setup.map, cfg.target_clearance, 0.9, 1.5, rng);
    bool ok = true;
    for (const auto& q : points)
      if ((p.head<2>() - q.head<2>()).norm() < cfg.target_min_separation) ok = false;
    if (ok) points.push_back(p);
  }

  setup.mission = cfg.mission;
  setup.mission.seed = cfg.seed;
  setup.mission.start = points.front();
  for (std::size_t i = 1; i < points.size(); ++i)
    setup.targets.push_back(
        MissionTarget{make_view_pose(points[i], uyaw(rng)), std::nullopt, PhaseKind::Hold});
  return setup;
}

inline ScenarioSetup build_view_poses(const ScenarioConfig& cfg) {
  ScenarioSetup setup;
  std::vector<TrunkSpec> trees;
  const std::vector<double> xs{-5.0, -2.5, 0.0, 2.5, 5.0};
  for (double x : xs)
    trees.push_back(TrunkSpec{Eigen::Vector2d(x, 0.0), 0.2, cfg.view_pose_standoff});

  std::vector<CylinderObstacle> obstacles;
  for (const auto& t : trees)
    obstacles.push_back(CylinderObstacle{t.center.x(), t.center.y(), t.radius, 0.0, 2.0});
  setup.map = small_map(8.0, 6.0, obstacles);

  const std::vector<double> altitudes{0.8, 1.2, 1.0, 1.4, 1.1};
  const std::vector<double> bearings{90.0, -90.0, 90.0, -90.0, 90.0};
  const std::vector<ViewPoseRef> poses = gen_view_poses(trees, altitudes, bearings, &setup.map);

  setup.mission = cfg.mission;
  setup.mission.seed = cfg.seed;
  setup.mission.start = Eigen::Vector3d(-7.0, -4.0, 1.0);
  for (const auto& p : poses)
    setup.targets.push_back(
        MissionTarget{p, gen_hold(p, cfg.hold_duration), PhaseKind::Hold});
  return setup;
}

inline ScenarioSetup build_scan(const ScenarioConfig& cfg) {
  ScenarioSetup setup;
  setup.map = small_map(5.0, 5.0);
  const ViewPoseRef pose = make_view_pose(Eigen::Vector3d(2.0, 1.0, 1.2), 0.0);
  setup.mission = cfg.mission;
  setup.mission.seed = cfg.seed;
  setup.mission.start = Eigen::Vector3d(-2.0, -2.0, 1.0);
  setup.targets.push_back(
      MissionTarget{pose, gen_scan(pose, cfg.scan_rate_deg), PhaseKind::Scan});
  return setup;
}

inline ScenarioSetup build_circle(const ScenarioConfig& cfg) {
  ScenarioSetup setup;
  const TrunkSpec trunk = cfg.behavior_trunk;
  setup.map = small_map(5.0, 5.0, {CylinderObstacle{trunk.center.x(), trunk.center.y(),
                                                    trunk.radius, 0.0, 2.0}});
  const ReferenceStream circle =
      gen_circle(trunk, cfg.circle_altitude, cfg.circle_rate_deg, cfg.circle_revolutions, 180.0);
  setup.mission = cfg.mission;
  setup.mission.seed = cfg.seed;
  setup.mission.start = Eigen::Vector3d(-2.0, 0.0, 1.0);
  setup.targets.push_back(MissionTarget{circle.samples.front(), circle, PhaseKind::Circle});
  return setup;
}

inline ScenarioSetup build_helix(const ScenarioConfig& cfg) {
  ScenarioSetup setup;
  const TrunkSpec trunk = cfg.behavior_trunk;
  setup.map = small_map(5.0, 5.0, {CylinderObstacle{trunk.center.x(), trunk.center.y(),
                                                    trunk.radius, 0.0, 2.0}});
  const ReferenceStream helix = gen_helix(trunk, cfg.helix_z_start, cfg.helix_z_end,
                                          cfg.helix_rate_deg, cfg.helix_climb_rate, 180.0);
  setup.mission = cfg.mission;
  setup.mission.seed = cfg.seed;
  setup.mission.start = Eigen::Vector3d(-2.0, 0.0, 1.0);
  setup.targets.push_back(MissionTarget{helix.samples.front(), helix, PhaseKind::Helix});
  return setup;
}

}  // namespace detail

inline ScenarioSetup build_scenario(ScenarioName name, const ScenarioConfig& cfg) {
  switch (name) {
    case ScenarioName::ForestNav: return detail::build_forest_nav(cfg);
    case ScenarioName::ViewPoses: return detail::build_view_poses(cfg);
    case ScenarioName::Scan: return detail::build_scan(cfg);
    case ScenarioName::Circle: return detail::build_circle(cfg);
    case ScenarioName::Helix: return detail::build_helix(cfg);
  }
  throw std::invalid_argument("build_scenario: bad name");
}

inline MissionLog run_scenario(ScenarioName name, const ScenarioConfig& cfg, Executor& executor) {
  const ScenarioSetup setup = build_scenario(name, cfg);
  return run_mission(setup.map, setup.targets, executor, setup.mission);
}

// --- log export -------------------------------------------------------------

// CSV column order (documented in the README):
// t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz,ref_x,ref_y,ref_z,ref_yaw_deg,
// a1,a2,a3,a4,rpm1,rpm2,rpm3,rpm4,reward_total,reward_survival,reward_xy,
// reward_z,reward_vel,reward_geodesic,reward_smoothness_penalty,
// target_index,phase_id
inline void export_log_csv(const MissionLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_log_csv: cannot open " + path);
  out << "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz,ref_x,ref_y,ref_z,ref_yaw_deg,"
         "a1,a2,a3,a4,rpm1,rpm2,rpm3,rpm4,reward_total,reward_survival,reward_xy,"
         "reward_z,reward_vel,reward_geodesic,reward_smoothness_penalty,"
         "target_index,phase_id\n";
  out.precision(17);
  for (const auto& s : log.steps) {
    out << s.t << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << ','
        << s.attitude.w() << ',' << s.attitude.x() << ',' << s.attitude.y() << ','
        << s.attitude.z() << ',' << s.velocity.x() << ',' << s.velocity.y() << ','
        << s.velocity.z() << ',' << s.angular_velocity.x() << ',' << s.angular_velocity.y() << ','
        << s.angular_velocity.z() << ',' << s.reference.position.x() << ','
        << s.reference.position.y() << ',' << s.reference.position.z() << ','
        << s.reference.yaw_deg;
    for (int i = 0; i < 4; ++i) out << ',' << s.action(i);
    for (int i = 0; i < 4; ++i) out << ',' << s.rpm(i);
    out << ',' << s.reward.total << ',' << s.reward.survival << ',' << s.reward.horizontal << ','
        << s.reward.vertical << ',' << s.reward.velocity << ',' << s.reward.geodesic << ','
        << s.reward.smoothness_penalty << ',' << s.target_index << ',' << s.phase_id << '\n';
  }
}

namespace detail {

inline nlohmann::json vec3_json(const Eigen::Vector3d& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}
inline Eigen::Vector3d vec3_from(const nlohmann::json& j) {
  return Eigen::Vector3d(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

}  // namespace detail

inline nlohmann::json log_to_json(const MissionLog& log) {
  nlohmann::json j;
  j["dt"] = log.dt;
  j["summary"] = {{"targets_total", log.summary.targets_total},
                  {"targets_visited", log.summary.targets_visited},
                  {"collision_count", log.summary.collision_count},
                  {"planned_path_length", log.summary.planned_path_length},
                  {"flight_time", log.summary.flight_time},
                  {"success", log.summary.success},
                  {"failure_reason", log.summary.failure_reason}};
  j["phases"] = nlohmann::json::array();
  for (const auto& p : log.phases)
    j["phases"].push_back({{"id", p.id},
                           {"kind", to_string(p.kind)},
                           {"target_index", p.target_index},
                           {"first_step", p.first_step},
                           {"end_step", p.end_step}});
  j["steps"] = nlohmann::json::array();
  for (const auto& s : log.steps) {
    j["steps"].push_back(
        {{"t", s.t},
         {"position", detail::vec3_json(s.position)},
         {"attitude", {s.attitude.w(), s.attitude.x(), s.attitude.y(), s.attitude.z()}},
         {"velocity", detail::vec3_json(s.velocity)},
         {"angular_velocity", detail::vec3_json(s.angular_velocity)},
         {"reference", {{"position", detail::vec3_json(s.reference.position)},
                        {"yaw_deg", s.reference.yaw_deg}}},
         {"action", {s.action(0), s.action(1), s.action(2), s.action(3)}},
         {"rpm", {s.rpm(0), s.rpm(1), s.rpm(2), s.rpm(3)}},
         {"reward", {{"total", s.reward.total},
                     {"survival", s.reward.survival},
                     {"horizontal", s.reward.horizontal},
                     {"vertical", s.reward.vertical},
                     {"velocity", s.reward.velocity},
                     {"geodesic", s.reward.geodesic},
                     {"smoothness_penalty", s.reward.smoothness_penalty}}},
         {"target_index", s.target_index},
         {"phase_id", s.phase_id}});
  }
  return j;
}

inline MissionLog log_from_json(const nlohmann::json& j) {
  MissionLog log;
  log.dt = j.at("dt").get<double>();
  const auto& sm = j.at("summary");
  log.summary.targets_total = sm.at("targets_total").get<int>();
  log.summary.targets_visited = sm.at("targets_visited").get<int>();
  log.summary.collision_count = sm.at("collision_count").get<int>();
  log.summary.planned_path_length = sm.at("planned_path_length").get<double>();
  log.summary.flight_time = sm.at("flight_time").get<double>();
  log.summary.success = sm.at("success").get<bool>();
  log.summary.failure_reason = sm.at("failure_reason").get<std::string>();
  for (const auto& jp : j.at("phases")) {
    PhaseInfo p;
    p.id = jp.at("id").get<int>();
    const std::string kind = jp.at("kind").get<std::string>();
    if (kind == "transit") p.kind = PhaseKind::Transit;
    else if (kind == "settle") p.kind = PhaseKind::Settle;
    else if (kind == "hold") p.kind = PhaseKind::Hold;
    else if (kind == "scan") p.kind = PhaseKind::Scan;
    else if (kind == "circle") p.kind = PhaseKind::Circle;
    else p.kind = PhaseKind::Helix;
    p.target_index = jp.at("target_index").get<int>();
    p.first_step = jp.at("first_step").get<std::size_t>();
    p.end_step = jp.at("end_step").get<std::size_t>();
    log.phases.push_back(p);
  }
  for (const auto& js : j.at("steps")) {
    StepRecord s;
    s.t = js.at("t").get<double>();
    s.position = detail::vec3_from(js.at("position"));
    const auto& q = js.at("attitude");
    s.attitude = Eigen::Quaterniond(q.at(0).get<double>(), q.at(1).get<double>(),
                                    q.at(2).get<double>(), q.at(3).get<double>());
    s.velocity = detail::vec3_from(js.at("velocity"));
    s.angular_velocity = detail::vec3_from(js.at("angular_velocity"));
    s.reference.position = detail::vec3_from(js.at("reference").at("position"));
    s.reference.yaw_deg = js.at("reference").at("yaw_deg").get<double>();
    for (int i = 0; i < 4; ++i) {
      s.action(i) = js.at("action").at(i).get<double>();
      s.rpm(i) = js.at("rpm").at(i).get<double>();
    }
    const auto& r = js.at("reward");
    s.reward.total = r.at("total").get<double>();
    s.reward.survival = r.at("survival").get<double>();
    s.reward.horizontal = r.at("horizontal").get<double>();
    s.reward.vertical = r.at("vertical").get<double>();
    s.reward.velocity = r.at("velocity").get<double>();
    s.reward.smoothness_penalty = r.at("smoothness_penalty").get<double>();
    s.reward.geodesic = r.at("geodesic").get<double>();
    s.target_index = js.at("target_index").get<int>();
    s.phase_id = js.at("phase_id").get<int>();
    log.steps.push_back(s);
  }
  return log;
}

inline void export_log_json(const MissionLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_log_json: cannot open " + path);
  out << log_to_json(log).dump() << "\n";
}

inline MissionLog load_log_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_log_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return log_from_json(j);
}

}  // namespace canopy
