#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "canopy/env.hpp"
#include "canopy/mlp.hpp"
#include "canopy/policy.hpp"

namespace canopy {

struct TrainConfig {
  long total_steps = 200000;
  int rollout_length = 512;  // steps per env between updates
  int minibatch_size = 256;
  int epochs = 10;
  double learning_rate = 3e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int n_envs = 4;
  uint64_t seed = 0;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TrainConfig: gamma in (0,1)");
    if (n_envs < 1) throw std::invalid_argument("TrainConfig: n_envs >= 1");
    if (rollout_length < 1 || minibatch_size < 1 || epochs < 1)
      throw std::invalid_argument("TrainConfig: rollout/minibatch/epochs >= 1");
    if (total_steps < 0) throw std::invalid_argument("TrainConfig: total_steps >= 0");
  }
};

struct LearningCurve {
  std::vector<std::pair<long, double>> points;  // (env_steps, mean_episode_reward)
};

using EnvFactory = std::function<InspectionEnv(int)>;

inline EnvFactory make_env_factory(const EnvConfig& env_config, uint64_t seed) {
  return [env_config, seed](int idx) {
    return InspectionEnv(env_config, seed + 0x9E3779B97F4A7C15ULL * (idx + 1));
  };
}

namespace detail {

inline double gaussian_log_prob(const Eigen::Vector4d& a, const Eigen::Vector4d& mu,
                                const Eigen::Vector4d& log_std) {
  constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)
  double lp = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double sigma = std::exp(log_std(i));
    const double z = (a(i) - mu(i)) / sigma;
    lp += -0.5 * z * z - log_std(i) - kLogSqrt2Pi;
  }
  return lp;
}

struct PolicyGrad {
  Mlp::Grad actor, critic;
  Eigen::Vector4d d_log_std = Eigen::Vector4d::Zero();

  void resize_like(const PolicyWeights& w) {
    actor.resize_like(w.actor);
    critic.resize_like(w.critic);
    d_log_std.setZero();
  }
  void set_zero() {
    actor.set_zero();
    critic.set_zero();
    d_log_std.setZero();
  }
  Eigen::VectorXd to_flat(const PolicyWeights& w) const {
    Eigen::VectorXd flat(w.param_count());
    int offset = 0;
    for (std::size_t l = 0; l < actor.dW.size(); ++l) {
      const auto& m = actor.dW[l];
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat(offset++) = m(r, c);
      for (Eigen::Index i = 0; i < actor.db[l].size(); ++i) flat(offset++) = actor.db[l](i);
    }
    for (std::size_t l = 0; l < critic.dW.size(); ++l) {
      const auto& m = critic.dW[l];
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat(offset++) = m(r, c);
      for (Eigen::Index i = 0; i < critic.db[l].size(); ++i) flat(offset++) = critic.db[l](i);
    }
    flat.tail<4>() = d_log_std;
    return flat;
  }
};

// PPO surrogate gradients for one minibatch, accumulated into grad.
// Returns (policy_loss, value_loss) for diagnostics.
inline std::pair<double, double> ppo_minibatch_update(
    PolicyWeights& w, const Eigen::MatrixXd& obs, const Eigen::MatrixXd& actions,
    const Eigen::VectorXd& logp_old, Eigen::VectorXd advantages, const Eigen::VectorXd& returns,
    const TrainConfig& cfg, PolicyGrad& grad) {
  const Eigen::Index batch = obs.cols();
  grad.set_zero();

  // advantage normalization per minibatch
  const double mean = advantages.mean();
  const double stdev =
      std::sqrt((advantages.array() - mean).square().sum() / advantages.size());
  advantages = (advantages.array() - mean) / (stdev + 1e-8);

  Mlp::Cache actor_cache, critic_cache;
  const Eigen::MatrixXd mu = w.actor.forward_batch(obs, &actor_cache);
  const Eigen::MatrixXd values = w.critic.forward_batch(obs, &critic_cache);

  const Eigen::Vector4d sigma = w.log_std.array().exp();
  const Eigen::Vector4d inv_var = sigma.array().square().inverse();

  Eigen::MatrixXd d_mu = Eigen::MatrixXd::Zero(4, batch);
  Eigen::MatrixXd d_value(1, batch);
  double policy_loss = 0.0, value_loss = 0.0;

  for (Eigen::Index n = 0; n < batch; ++n) {
    const Eigen::Vector4d a = actions.col(n);
    const Eigen::Vector4d m = mu.col(n);
    const double lp_new = gaussian_log_prob(a, m, w.log_std);
    const double ratio = std::exp(lp_new - logp_old(n));
    const double adv = advantages(n);
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
    const double surr1 = ratio * adv;
    const double surr2 = clipped * adv;
    policy_loss += -std::min(surr1, surr2);

    // gradient flows only through the unclipped branch of the min
    if (surr1 <= surr2) {
      const double d_lp = -adv * ratio / static_cast<double>(batch);
      d_mu.col(n) = d_lp * (a - m).cwiseProduct(inv_var);
      grad.d_log_std +=
          d_lp * ((a - m).array().square() * inv_var.array() - 1.0).matrix();
    }

    const double verr = values(0, n) - returns(n);
    value_loss += verr * verr;
    d_value(0, n) = cfg.value_coef * 2.0 * verr / static_cast<double>(batch);
  }
  policy_loss /= static_cast<double>(batch);
  value_loss /= static_cast<double>(batch);

  // entropy bonus: H = sum(log_std) + const, state independent
  grad.d_log_std.array() -= cfg.entropy_coef;

  w.actor.backward(actor_cache, d_mu, grad.actor);
  w.critic.backward(critic_cache, d_value, grad.critic);

  if (!std::isfinite(policy_loss) || !std::isfinite(value_loss))
    throw std::runtime_error("PPO: non-finite loss (policy=" + std::to_string(policy_loss) +
                             ", value=" + std::to_string(value_loss) + ")");
  return {policy_loss, value_loss};
}

}  // namespace detail

/// On-policy clipped-surrogate training over vectorized environments.
/// Fully seeded and single threaded; identical configs give identical
/// weights and curves.
inline std::pair<PolicyWeights, LearningCurve> train(const EnvFactory& env_factory,
                                                     const TrainConfig& cfg) {
  cfg.validate();
  PolicyWeights w = PolicyWeights::init(cfg.seed);
  LearningCurve curve;
  if (cfg.total_steps == 0) return {w, curve};

  const int n_envs = cfg.n_envs;
  const int t_len = cfg.rollout_length;
  const Eigen::Index n_samples = static_cast<Eigen::Index>(t_len) * n_envs;

  std::vector<InspectionEnv> envs;
  envs.reserve(n_envs);
  for (int e = 0; e < n_envs; ++e) envs.push_back(env_factory(e));

  std::vector<Observation> current_obs(n_envs);
  for (int e = 0; e < n_envs; ++e) current_obs[e] = envs[e].reset();

  std::mt19937_64 action_rng(cfg.seed ^ 0xA5A5A5A5DEADBEEFULL);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x5555AAAA12345678ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::MatrixXd obs_buf(17, n_samples), act_buf(4, n_samples);
  Eigen::VectorXd logp_buf(n_samples), value_buf(n_samples), reward_buf(n_samples);
  Eigen::VectorXd done_buf(n_samples);  // 1.0 when the episode ended at this step

  Adam adam(w.param_count(), cfg.learning_rate);
  detail::PolicyGrad grad;
  grad.resize_like(w);

  std::vector<double> ep_reward(n_envs, 0.0);
  long global_steps = 0;

  auto flat_index = [n_envs](int t, int e) {
    return static_cast<Eigen::Index>(t) * n_envs + e;
  };

  while (global_steps < cfg.total_steps) {
    std::vector<double> finished_episode_rewards;

    // --- rollout ---
    for (int t = 0; t < t_len; ++t) {
      for (int e = 0; e < n_envs; ++e) {
        const Eigen::Index idx = flat_index(t, e);
        obs_buf.col(idx) = current_obs[e].vec;

        const Eigen::Vector4d mu = w.actor.forward(current_obs[e].vec);
        Eigen::Vector4d noise;
        for (int i = 0; i < 4; ++i) noise(i) = gauss(action_rng);
        const Eigen::Vector4d action = mu + w.log_std.array().exp().matrix().cwiseProduct(noise);
        const Eigen::Vector4d clipped = action.cwiseMax(-1.0).cwiseMin(1.0);

        act_buf.col(idx) = action;
        logp_buf(idx) = detail::gaussian_log_prob(action, mu, w.log_std);
        value_buf(idx) = w.critic.forward(current_obs[e].vec)(0);

        StepResult res = envs[e].step(clipped);
        double reward = res.reward.total;
        ep_reward[e] += reward;

        const bool done = res.status != TerminationStatus::Running;
        if (done) {
          // time-limit truncation still bootstraps through the value function
          if (res.status == TerminationStatus::TimeLimit)
            reward += cfg.gamma * w.critic.forward(res.observation.vec)(0);
          finished_episode_rewards.push_back(ep_reward[e]);
          ep_reward[e] = 0.0;
          current_obs[e] = envs[e].reset();
        } else {
          current_obs[e] = res.observation;
        }
        reward_buf(idx) = reward;
        done_buf(idx) = done ? 1.0 : 0.0;
      }
    }
    global_steps += n_samples;

    // --- GAE ---
    Eigen::VectorXd advantages(n_samples), returns(n_samples);
    for (int e = 0; e < n_envs; ++e) {
      const double last_value = w.critic.forward(current_obs[e].vec)(0);
      double adv = 0.0;
      for (int t = t_len - 1; t >= 0; --t) {
        const Eigen::Index idx = flat_index(t, e);
        const double nonterminal = 1.0 - done_buf(idx);
        const double next_value =
            (t == t_len - 1) ? last_value : value_buf(flat_index(t + 1, e));
        const double delta =
            reward_buf(idx) + cfg.gamma * next_value * nonterminal - value_buf(idx);
        adv = delta + cfg.gamma * cfg.gae_lambda * nonterminal * adv;
        advantages(idx) = adv;
        returns(idx) = adv + value_buf(idx);
      }
    }

    // --- optimization epochs ---
    std::vector<Eigen::Index> order(n_samples);
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      for (Eigen::Index begin = 0; begin < n_samples; begin += cfg.minibatch_size) {
        const Eigen::Index bsz = std::min<Eigen::Index>(cfg.minibatch_size, n_samples - begin);
        Eigen::MatrixXd mb_obs(17, bsz), mb_act(4, bsz);
        Eigen::VectorXd mb_logp(bsz), mb_adv(bsz), mb_ret(bsz);
        for (Eigen::Index k = 0; k < bsz; ++k) {
          const Eigen::Index src = order[begin + k];
          mb_obs.col(k) = obs_buf.col(src);
          mb_act.col(k) = act_buf.col(src);
          mb_logp(k) = logp_buf(src);
          mb_adv(k) = advantages(src);
          mb_ret(k) = returns(src);
        }
        detail::ppo_minibatch_update(w, mb_obs, mb_act, mb_logp, mb_adv, mb_ret, cfg, grad);

        Eigen::VectorXd flat_grad = grad.to_flat(w);
        const double norm = flat_grad.norm();
        if (norm > cfg.max_grad_norm) flat_grad *= cfg.max_grad_norm / norm;
        Eigen::VectorXd params = w.to_flat();
        adam.step(params, flat_grad);
        w.from_flat(params);
        if (!w.all_finite()) throw std::runtime_error("PPO: weights diverged to non-finite");
      }
    }

    if (!finished_episode_rewards.empty()) {
      const double mean_ep =
          std::accumulate(finished_episode_rewards.begin(), finished_episode_rewards.end(), 0.0) /
          static_cast<double>(finished_episode_rewards.size());
      curve.points.emplace_back(global_steps, mean_ep);
    }
  }
  return {w, curve};
}

}  // namespace canopy
