// canopy command line: forest generation, path planning, policy training and
// evaluation, and the five end-to-end inspection scenarios.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "canopy/evaluate.hpp"
#include "canopy/io.hpp"
#include "canopy/mission.hpp"
#include "canopy/ppo.hpp"

using namespace canopy;

namespace {

PhysicalParams params_from(const std::string& params_file) {
  return params_file.empty() ? PhysicalParams{} : load_physical_params(params_file);
}

std::unique_ptr<Executor> make_executor(const std::string& spec, const PhysicalParams& params) {
  if (spec == "baseline") return std::make_unique<BaselineExecutor>(params);
  if (spec.rfind("policy:", 0) == 0)
    return std::make_unique<PolicyExecutor>(load_weights(spec.substr(7)));
  throw std::invalid_argument("executor must be 'baseline' or 'policy:<weights-file>'");
}

int cmd_gen_forest(uint64_t seed, int count, double area, const std::string& out) {
  ForestConfig cfg;
  cfg.seed = seed;
  cfg.trunk_count = count;
  cfg.area_x = area;
  cfg.area_y = area;
  const ForestMap map = generate_forest(cfg);
  save_map(map, out);
  std::printf("wrote %zu trunks over %.0f x %.0f m to %s\n", map.obstacles.size(), cfg.area_x,
              cfg.area_y, out.c_str());
  return 0;
}

int cmd_plan(const std::string& map_file, std::vector<double> start, std::vector<double> goal,
             double goal_yaw, uint64_t seed, int iterations, const std::string& out_json,
             const std::string& out_csv) {
  const ForestMap map = load_map(map_file);
  RRTConfig cfg;
  cfg.seed = seed;
  cfg.max_iterations = iterations;
  const Eigen::Vector3d s(start[0], start[1], start[2]);
  const Eigen::Vector3d g(goal[0], goal[1], goal[2]);

  const auto raw = plan_path(s, g, map, cfg);
  if (!raw) {
    std::fprintf(stderr, "no path found after %d iterations\n", cfg.max_iterations);
    return 2;
  }
  const WaypointPath path = with_final_yaw(smooth_path(*raw, map), goal_yaw);
  if (!out_json.empty()) save_path_json(path, out_json);
  if (!out_csv.empty()) save_path_csv(path, out_csv);
  std::printf("path: %zu waypoints, %.2f m (straight line %.2f m)\n", path.waypoints.size(),
              path.length, (g - s).norm());
  return 0;
}

int cmd_train(long steps, uint64_t seed, int n_envs, double lr, const std::string& out_dir,
              const std::string& params_file) {
  TrainConfig cfg;
  cfg.total_steps = steps;
  cfg.seed = seed;
  cfg.n_envs = n_envs;
  cfg.learning_rate = lr;

  EnvConfig ec;
  ec.params = params_from(params_file);
  std::filesystem::create_directories(out_dir);

  std::printf("training: %ld env steps, %d envs, seed %llu\n", steps, n_envs,
              static_cast<unsigned long long>(seed));
  const auto [weights, curve] = train(make_env_factory(ec, seed), cfg);

  const std::string wpath = out_dir + "/weights.json";
  const std::string cpath = out_dir + "/curve.csv";
  save_weights(weights, wpath);
  save_curve_csv(curve, cpath);
  if (!curve.points.empty())
    std::printf("final mean episode reward: %.1f\n", curve.points.back().second);
  std::printf("wrote %s and %s\n", wpath.c_str(), cpath.c_str());
  return 0;
}

ScenarioConfig scenario_config_from_file(const std::string& config_file) {
  ScenarioConfig cfg;
  if (config_file.empty()) return cfg;
  std::ifstream in(config_file);
  if (!in) throw std::runtime_error("cannot open " + config_file);
  nlohmann::json j;
  in >> j;
  return scenario_config_from_json(j);
}

int cmd_evaluate(const std::string& executor_spec, const std::string& scenario, int episodes,
                 uint64_t seed, bool noisy, const std::string& params_file,
                 const std::string& config_file) {
  const PhysicalParams params = params_from(params_file);
  auto exec = make_executor(executor_spec, params);
  ScenarioConfig scfg = scenario_config_from_file(config_file);
  scfg.mission.params = params;
  scfg.mission.policy_observation_noise = noisy;

  if (scenario == "hover") {
    EvalConfig cfg;
    cfg.env.params = params;
    cfg.env.noise = scfg.mission.noise;
    cfg.env.limits.horizon = scfg.episode_horizon;
    cfg.env.limits.position_bound = scfg.mission.position_bound;
    cfg.env.observation_noise = noisy;
    cfg.n_episodes = episodes;
    cfg.seed = seed;
    const EvalMetrics m = evaluate_hover(*exec, cfg);
    std::printf("scenario=hover executor=%s episodes=%d noise=%s\n", exec->name(), episodes,
                noisy ? "on" : "off");
    std::printf(
        "success_rate %.3f\nmean_final_position_error %.4f m\nmean_final_yaw_error %.2f deg\n",
        m.success_rate, m.mean_final_position_error, m.mean_final_yaw_error_deg);
    return m.success_rate > 0.0 ? 0 : 3;
  }

  scfg.seed = seed;
  const ScenarioEvalMetrics m =
      evaluate_scenario(*exec, scenario_from_string(scenario), scfg, episodes);
  std::printf("scenario=%s executor=%s episodes=%d\n", scenario.c_str(), exec->name(), episodes);
  std::printf("success_rate %.3f\nmean_position_error %.4f m\nmean_yaw_error %.2f deg\n",
              m.success_rate, m.mean_position_error, m.mean_yaw_error_deg);
  return m.success_rate > 0.0 ? 0 : 3;
}

int cmd_run_scenario(const std::string& name, uint64_t seed, const std::string& executor_spec,
                     const std::string& out_dir, const std::string& params_file, bool noisy,
                     const std::string& config_file) {
  ScenarioConfig cfg = scenario_config_from_file(config_file);
  cfg.seed = seed;
  cfg.mission.params = params_from(params_file);
  cfg.mission.policy_observation_noise = noisy;
  auto exec = make_executor(executor_spec, cfg.mission.params);

  const ScenarioName scenario = scenario_from_string(name);
  const MissionLog log = run_scenario(scenario, cfg, *exec);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    export_log_csv(log, out_dir + "/log.csv");
    export_log_json(log, out_dir + "/log.json");
    // tour over the scenario's targets; planning is deterministic per seed
    const ScenarioSetup setup = build_scenario(scenario, cfg);
    if (!setup.targets.empty()) {
      std::vector<ViewPoseRef> poses;
      for (const auto& t : setup.targets) poses.push_back(t.pose);
      save_tour_json(plan_tour(setup.mission.start, poses), out_dir + "/tour.json");
    }
    std::printf("wrote %s/{log.csv, log.json, tour.json}\n", out_dir.c_str());
  }
  std::printf("scenario=%s executor=%s seed=%llu\n", name.c_str(), exec->name(),
              static_cast<unsigned long long>(seed));
  std::printf("success=%s targets=%d/%d collisions=%d flight_time=%.1f s path_length=%.1f m\n",
              log.summary.success ? "yes" : "no", log.summary.targets_visited,
              log.summary.targets_total, log.summary.collision_count, log.summary.flight_time,
              log.summary.planned_path_length);
  for (const auto& ph : log.phases)
    if (ph.kind != PhaseKind::Transit && ph.kind != PhaseKind::Settle)
      std::printf("  phase %-6s target %d: position rms %.4f m\n", to_string(ph.kind),
                  ph.target_index, phase_position_rms(log, ph.id));
  if (!log.summary.success)
    std::printf("failure: %s\n", log.summary.failure_reason.c_str());
  return log.summary.success ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canopy: under-canopy quadrotor inspection stack"};
  app.require_subcommand(1);

  std::string params_file;
  app.add_option("--params", params_file, "physical parameter JSON (defaults embedded)");

  // gen-forest
  auto* gen = app.add_subcommand("gen-forest", "generate a random forest map");
  uint64_t gf_seed = 0;
  int gf_count = 200;
  double gf_area = 20.0;
  std::string gf_out = "forest.json";
  gen->add_option("--seed", gf_seed, "generation seed");
  gen->add_option("--count", gf_count, "trunk count");
  gen->add_option("--area", gf_area, "square area side length [m]");
  gen->add_option("--out", gf_out, "output map file");

  // plan
  auto* plan = app.add_subcommand("plan", "plan a collision-free path on a map");
  std::string pl_map;
  std::vector<double> pl_start{0, 0, 1}, pl_goal{5, 5, 1};
  double pl_yaw = 0.0;
  uint64_t pl_seed = 0;
  int pl_iters = 5000;
  std::string pl_json = "path.json", pl_csv;
  plan->add_option("--map", pl_map, "forest map JSON")->required();
  plan->add_option("--start", pl_start, "start x y z")->expected(3);
  plan->add_option("--goal", pl_goal, "goal x y z")->expected(3);
  plan->add_option("--goal-yaw", pl_yaw, "final heading [deg]");
  plan->add_option("--seed", pl_seed, "planner seed");
  plan->add_option("--iterations", pl_iters, "planner iteration budget");
  plan->add_option("--out", pl_json, "output path JSON");
  plan->add_option("--out-csv", pl_csv, "optional CSV export");

  // train
  auto* tr = app.add_subcommand("train", "train the motor-level policy");
  long tr_steps = 400000;
  uint64_t tr_seed = 1;
  int tr_envs = 4;
  double tr_lr = 3e-4;
  std::string tr_out = "train_out";
  tr->add_option("--steps", tr_steps, "total environment steps");
  tr->add_option("--seed", tr_seed, "training seed");
  tr->add_option("--envs", tr_envs, "parallel environments");
  tr->add_option("--lr", tr_lr, "learning rate");
  tr->add_option("--out", tr_out, "output directory");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "evaluate an executor on hover or a scenario");
  std::string ev_exec = "baseline";
  std::string ev_scenario = "hover";
  int ev_eps = 50;
  uint64_t ev_seed = 0;
  std::string ev_config;
  bool ev_noisy = false;
  ev->add_option("--executor", ev_exec, "baseline | policy:<weights-file>");
  ev->add_option("--scenario", ev_scenario,
                 "hover | forest_nav | view_poses | scan | circle | helix");
  ev->add_option("--episodes", ev_eps, "episode count");
  ev->add_option("--seed", ev_seed, "evaluation seed");
  ev->add_option("--config", ev_config, "scenario config JSON (noise, horizon, ...)");
  ev->add_flag("--noisy", ev_noisy, "enable observation noise");

  // run-scenario
  auto* rs = app.add_subcommand("run-scenario", "run one of the five inspection scenarios");
  std::string rs_name;
  uint64_t rs_seed = 0;
  std::string rs_exec = "baseline";
  std::string rs_out;
  std::string rs_config;
  bool rs_noisy = false;
  rs->add_option("--name", rs_name, "forest_nav | view_poses | scan | circle | helix")
      ->required();
  rs->add_option("--seed", rs_seed, "scenario seed");
  rs->add_option("--executor", rs_exec, "baseline | policy:<weights-file>");
  rs->add_option("--out", rs_out, "output directory for logs");
  rs->add_option("--config", rs_config, "scenario config JSON (noise, rates, forest, ...)");
  rs->add_flag("--noisy", rs_noisy, "policy sees noisy observations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_forest(gf_seed, gf_count, gf_area, gf_out);
    if (plan->parsed())
      return cmd_plan(pl_map, pl_start, pl_goal, pl_yaw, pl_seed, pl_iters, pl_json, pl_csv);
    if (tr->parsed()) return cmd_train(tr_steps, tr_seed, tr_envs, tr_lr, tr_out, params_file);
    if (ev->parsed())
      return cmd_evaluate(ev_exec, ev_scenario, ev_eps, ev_seed, ev_noisy, params_file,
                          ev_config);
    if (rs->parsed())
      return cmd_run_scenario(rs_name, rs_seed, rs_exec, rs_out, params_file, rs_noisy, rs_config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
