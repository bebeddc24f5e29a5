#pragma once

#include <Eigen/Dense>
#include <vector>

#include "canopy/angles.hpp"
#include "canopy/env.hpp"
#include "canopy/executor.hpp"
#include "canopy/mission.hpp"

namespace canopy {

struct EpisodeResult {
  double final_position_error = 0.0;  // m, at episode end
  double final_yaw_error_deg = 0.0;
  int steps = 0;
  TerminationStatus status = TerminationStatus::Running;
  bool success = false;
};

struct EvalMetrics {
  double success_rate = 0.0;
  double mean_final_position_error = 0.0;
  double mean_final_yaw_error_deg = 0.0;
  std::vector<EpisodeResult> episodes;
};

struct EvalConfig {
  EnvConfig env;           // env.observation_noise selects noisy vs noise-free
  int n_episodes = 50;
  uint64_t seed = 0;
  double success_position_error = 0.25;  // m
};

/// Hover evaluation from random cylinder resets around the configured
/// reference. Success = episode survives to the horizon and ends within the
/// position threshold.
inline EvalMetrics evaluate_hover(Executor& executor, const EvalConfig& cfg) {
  InspectionEnv env(cfg.env, cfg.seed);
  EvalMetrics metrics;
  double pos_sum = 0.0, yaw_sum = 0.0;
  int successes = 0;

  for (int ep = 0; ep < cfg.n_episodes; ++ep) {
    Observation obs = env.reset();
    executor.reset();
    ExecutorContext ctx{env.reference(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), 0.0};

    EpisodeResult result;
    TerminationStatus status = TerminationStatus::Running;
    while (status == TerminationStatus::Running) {
      const Eigen::Vector4d action = executor.act(obs, env.state(), ctx);
      StepResult res = env.step(action);
      obs = res.observation;
      status = res.status;
      ++result.steps;
    }
    result.status = status;
    result.final_position_error = (env.state().position - env.reference().position).norm();
    const double yaw = rad2deg(
        std::atan2(2.0 * (env.state().attitude.w() * env.state().attitude.z() +
                          env.state().attitude.x() * env.state().attitude.y()),
                   1.0 - 2.0 * (env.state().attitude.y() * env.state().attitude.y() +
                                env.state().attitude.z() * env.state().attitude.z())));
    result.final_yaw_error_deg = std::abs(ang_diff_deg(yaw, env.reference().yaw_deg));
    result.success = (status == TerminationStatus::TimeLimit) &&
                     (result.final_position_error < cfg.success_position_error);

    pos_sum += result.final_position_error;
    yaw_sum += result.final_yaw_error_deg;
    successes += result.success ? 1 : 0;
    metrics.episodes.push_back(result);
  }

  const double n = static_cast<double>(cfg.n_episodes);
  metrics.success_rate = successes / n;
  metrics.mean_final_position_error = pos_sum / n;
  metrics.mean_final_yaw_error_deg = yaw_sum / n;
  return metrics;
}

struct ScenarioEvalMetrics {
  double success_rate = 0.0;
  double mean_position_error = 0.0;   // mean tracking error over all logged steps
  double mean_yaw_error_deg = 0.0;
  int episodes = 0;
};

/// Repeated runs of one inspection scenario under different seeds.
inline ScenarioEvalMetrics evaluate_scenario(Executor& executor, ScenarioName name,
                                             const ScenarioConfig& base, int n_episodes) {
  ScenarioEvalMetrics m;
  m.episodes = n_episodes;
  int successes = 0;
  double pos_sum = 0.0, yaw_sum = 0.0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    ScenarioConfig cfg = base;
    cfg.seed = base.seed + static_cast<uint64_t>(ep);
    executor.reset();
    const MissionLog log = run_scenario(name, cfg, executor);
    successes += log.summary.success ? 1 : 0;

    double psum = 0.0, ysum = 0.0;
    for (const auto& s : log.steps) {
      psum += (s.position - s.reference.position).norm();
      const double yaw = rad2deg(std::atan2(
          2.0 * (s.attitude.w() * s.attitude.z() + s.attitude.x() * s.attitude.y()),
          1.0 - 2.0 * (s.attitude.y() * s.attitude.y() + s.attitude.z() * s.attitude.z())));
      ysum += std::abs(ang_diff_deg(yaw, s.reference.yaw_deg));
    }
    if (!log.steps.empty()) {
      pos_sum += psum / static_cast<double>(log.steps.size());
      yaw_sum += ysum / static_cast<double>(log.steps.size());
    }
  }
  m.success_rate = static_cast<double>(successes) / n_episodes;
  m.mean_position_error = pos_sum / n_episodes;
  m.mean_yaw_error_deg = yaw_sum / n_episodes;
  return m;
}

}  // namespace canopy
