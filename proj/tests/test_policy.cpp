#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "canopy/cascade_controller.hpp"
#include "canopy/evaluate.hpp"
#include "canopy/policy.hpp"
#include "canopy/ppo.hpp"

using namespace canopy;

namespace {

Eigen::Matrix<double, 17, 1> random_obs(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Matrix<double, 17, 1> o;
  for (int i = 0; i < 17; ++i) o(i) = g(rng);
  return o;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

TEST(ActorForward, ZeroWeightsGiveZeroAction) {
  const PolicyWeights w = PolicyWeights::zeros();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector4d a = actor_forward(random_obs(rng), w);
    EXPECT_EQ(a, Eigen::Vector4d::Zero());
  }
  EXPECT_DOUBLE_EQ(critic_forward(random_obs(rng), w), 0.0);
}

TEST(ActorForward, DeterministicAndBounded) {
  const PolicyWeights w = PolicyWeights::init(3);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto obs = random_obs(rng);
    const Eigen::Vector4d a = actor_forward(obs, w);
    const Eigen::Vector4d b = actor_forward(obs, w);
    EXPECT_EQ(a, b);
    EXPECT_TRUE((a.array().abs() <= 1.0).all());  // tanh squash
  }
}

TEST(ActorForward, RejectsNonFiniteWeights) {
  PolicyWeights w = PolicyWeights::init(3);
  w.actor.weight(0)(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(actor_forward(Eigen::Matrix<double, 17, 1>::Zero(), w), std::invalid_argument);
}

// tanh layers are 1-Lipschitz, so the network is Lipschitz with constant
// bounded by the product of the layer spectral norms.
TEST(ActorForward, LipschitzBoundFromSpectralNorms) {
  const PolicyWeights w = PolicyWeights::init(11);
  double lip = 1.0;
  for (std::size_t l = 0; l < w.actor.layer_count(); ++l) lip *= spectral_norm(w.actor.weight(l));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto obs = random_obs(rng);
    Eigen::Matrix<double, 17, 1> delta;
    for (int i = 0; i < 17; ++i) delta(i) = 1e-3 * g(rng);
    const Eigen::Matrix<double, 17, 1> shifted = obs + delta;
    const Eigen::Vector4d da = actor_forward(shifted, w) - actor_forward(obs, w);
    EXPECT_LE(da.norm(), lip * delta.norm() * (1.0 + 1e-9));
  }
}

// Central finite differences validate the analytic backprop to 1e-5 relative
// on well over 100 randomly chosen weights, for both networks.
TEST(Gradients, BackpropMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  PolicyWeights w = PolicyWeights::init(29);

  const int batch = 16;
  Eigen::MatrixXd obs(17, batch);
  for (int c = 0; c < batch; ++c) obs.col(c) = random_obs(rng);
  Eigen::MatrixXd actor_seed(4, batch), critic_seed(1, batch);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int c = 0; c < batch; ++c) {
    for (int r = 0; r < 4; ++r) actor_seed(r, c) = g(rng);
    critic_seed(0, c) = g(rng);
  }

  // scalar losses: fixed random linear functionals of the network outputs
  auto actor_loss = [&](const Mlp& net) {
    return (net.forward_batch(obs).array() * actor_seed.array()).sum();
  };
  auto critic_loss = [&](const Mlp& net) {
    return (net.forward_batch(obs).array() * critic_seed.array()).sum();
  };

  Mlp::Cache cache;
  Mlp::Grad actor_grad, critic_grad;
  actor_grad.resize_like(w.actor);
  critic_grad.resize_like(w.critic);
  w.actor.forward_batch(obs, &cache);
  w.actor.backward(cache, actor_seed, actor_grad);
  w.critic.forward_batch(obs, &cache);
  w.critic.backward(cache, critic_seed, critic_grad);

  auto check_net = [&](Mlp& net, const Mlp::Grad& grad, auto loss_fn, const char* name) {
    const int n_params = net.param_count();
    Eigen::VectorXd flat_grad(n_params);
    int offset = 0;
    for (std::size_t l = 0; l < grad.dW.size(); ++l) {
      const auto& m = grad.dW[l];
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat_grad(offset++) = m(r, c);
      for (Eigen::Index i = 0; i < grad.db[l].size(); ++i) flat_grad(offset++) = grad.db[l](i);
    }

    Eigen::VectorXd params(n_params);
    net.flatten_into(params);
    std::vector<int> order(n_params);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    int checked = 0;
    for (int idx : order) {
      if (checked >= 120) break;
      const double h = 6e-6 * std::max(1.0, std::abs(params(idx)));
      Eigen::VectorXd p = params;
      p(idx) = params(idx) + h;
      net.unflatten_from(p);
      const double up = loss_fn(net);
      p(idx) = params(idx) - h;
      net.unflatten_from(p);
      const double down = loss_fn(net);
      net.unflatten_from(params);

      const double fd = (up - down) / (2.0 * h);
      const double an = flat_grad(idx);
      if (std::max(std::abs(fd), std::abs(an)) < 1e-6) continue;  // below FD resolution
      EXPECT_LE(std::abs(fd - an), 1e-5 * std::max(std::abs(fd), std::abs(an)) + 1e-10)
          << name << " weight " << idx;
      ++checked;
    }
    EXPECT_GE(checked, 100) << name;
  };

  check_net(w.actor, actor_grad, actor_loss, "actor");
  check_net(w.critic, critic_grad, critic_loss, "critic");
}

// End-to-end check of the PPO surrogate gradient (clip, log-prob, value and
// entropy terms) against finite differences of the scalar loss.
TEST(Gradients, PpoLossMatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  TrainConfig cfg;
  cfg.clip_ratio = 0.2;
  cfg.value_coef = 0.5;
  cfg.entropy_coef = 0.01;

  const int batch = 8;
  Eigen::MatrixXd obs(17, batch), actions(4, batch);
  Eigen::VectorXd logp_old(batch), adv(batch), ret(batch);
  std::normal_distribution<double> g(0.0, 1.0);
  PolicyWeights w = PolicyWeights::init(47);
  for (int c = 0; c < batch; ++c) {
    obs.col(c) = random_obs(rng);
    const Eigen::Vector4d mu = w.actor.forward(obs.col(c));
    Eigen::Vector4d noise;
    for (int i = 0; i < 4; ++i) noise(i) = g(rng);
    actions.col(c) = mu + 0.3 * noise;
    logp_old(c) = detail::gaussian_log_prob(actions.col(c), mu, w.log_std) + 0.05 * g(rng);
    adv(c) = g(rng);
    ret(c) = g(rng);
  }

  auto total_loss = [&](PolicyWeights& weights) {
    detail::PolicyGrad scratch;
    scratch.resize_like(weights);
    const auto [pl, vl] =
        detail::ppo_minibatch_update(weights, obs, actions, logp_old, adv, ret, cfg, scratch);
    const double entropy = weights.log_std.sum();  // + constant
    return pl + cfg.value_coef * vl - cfg.entropy_coef * entropy;
  };

  detail::PolicyGrad grad;
  grad.resize_like(w);
  detail::ppo_minibatch_update(w, obs, actions, logp_old, adv, ret, cfg, grad);
  const Eigen::VectorXd flat_grad = grad.to_flat(w);
  const Eigen::VectorXd params = w.to_flat();

  std::vector<int> order(w.param_count());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  int checked = 0;
  for (int idx : order) {
    if (checked >= 150) break;
    const double h = 6e-6 * std::max(1.0, std::abs(params(idx)));
    Eigen::VectorXd p = params;
    p(idx) += h;
    w.from_flat(p);
    const double up = total_loss(w);
    p(idx) = params(idx) - h;
    w.from_flat(p);
    const double down = total_loss(w);
    w.from_flat(params);

    const double fd = (up - down) / (2.0 * h);
    const double an = flat_grad(idx);
    if (std::max(std::abs(fd), std::abs(an)) < 1e-6) continue;
    EXPECT_LE(std::abs(fd - an), 2e-5 * std::max(std::abs(fd), std::abs(an)) + 1e-9)
        << "param " << idx;
    ++checked;
  }
  EXPECT_GE(checked, 100);
  // the last four parameters are the log-std entries; they must carry gradient
  EXPECT_GT(flat_grad.tail<4>().norm(), 0.0);
}

TEST(Train, ZeroStepsReturnsInitialWeights) {
  TrainConfig cfg;
  cfg.total_steps = 0;
  cfg.seed = 9;
  EnvConfig ec;
  const auto [w, curve] = train(make_env_factory(ec, 9), cfg);
  const PolicyWeights fresh = PolicyWeights::init(9);
  EXPECT_EQ(w.to_flat(), fresh.to_flat());
  EXPECT_TRUE(curve.points.empty());
}

TEST(Train, SeededRunsAreBitIdentical) {
  TrainConfig cfg;
  cfg.total_steps = 4096;
  cfg.rollout_length = 512;
  cfg.n_envs = 2;
  cfg.minibatch_size = 256;
  cfg.epochs = 4;
  cfg.seed = 12345;
  EnvConfig ec;
  ec.limits.horizon = 300;  // short episodes so the curve has points

  const auto [w1, c1] = train(make_env_factory(ec, 12345), cfg);
  const auto [w2, c2] = train(make_env_factory(ec, 12345), cfg);
  EXPECT_EQ(w1.to_flat(), w2.to_flat());
  ASSERT_EQ(c1.points.size(), c2.points.size());
  for (std::size_t i = 0; i < c1.points.size(); ++i) {
    EXPECT_EQ(c1.points[i].first, c2.points[i].first);
    EXPECT_EQ(c1.points[i].second, c2.points[i].second);
  }
  // env_steps strictly increasing
  for (std::size_t i = 1; i < c1.points.size(); ++i)
    EXPECT_GT(c1.points[i].first, c1.points[i - 1].first);
}

TEST(Train, RejectsBadConfig) {
  TrainConfig cfg;
  cfg.gamma = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.gamma = 0.99;
  cfg.n_envs = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Baseline, HoverActionIsZeroAtEquilibrium) {
  PhysicalParams p;
  CascadeController ctrl(p, CascadeGains{});
  QuadrotorState s;
  s.position = Eigen::Vector3d(0, 0, 1);
  const Eigen::Vector4d a = ctrl.control(s, make_view_pose(s.position, 0.0));
  EXPECT_LT(a.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Baseline, ClimbCommandIsPositive) {
  PhysicalParams p;
  CascadeController ctrl(p, CascadeGains{});
  QuadrotorState s;
  s.position = Eigen::Vector3d(0, 0, 1);
  const Eigen::Vector4d a = ctrl.control(s, make_view_pose(Eigen::Vector3d(0, 0, 1.5), 0.0));
  EXPECT_GT(a.mean(), 0.0);
}

TEST(Baseline, StepResponseSettlesWithinTolerance) {
  PhysicalParams p;
  CascadeController ctrl(p, CascadeGains{});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    // step references inside the < 3 m envelope
    QuadrotorState s;
    s.position = Eigen::Vector3d(0, 0, 1);
    const ViewPoseRef ref = make_view_pose(
        Eigen::Vector3d(2.0 * u(rng), 2.0 * u(rng), 1.0 + 0.8 * u(rng)), 180.0 * u(rng));
    for (int i = 0; i < 500; ++i)  // 5 s
      s = step_control_period(s, action_to_rpm(ctrl.control(s, ref), p), p);
    EXPECT_LT((s.position - ref.position).norm(), 0.05);
  }
}

TEST(Baseline, StabilizesEveryCylinderReset) {
  PhysicalParams p;
  EvalConfig cfg;
  cfg.env.observation_noise = false;
  cfg.n_episodes = 100;
  cfg.seed = 555;
  BaselineExecutor exec(p);
  const EvalMetrics m = evaluate_hover(exec, cfg);
  EXPECT_DOUBLE_EQ(m.success_rate, 1.0);
  EXPECT_LT(m.mean_final_position_error, 0.05);
  EXPECT_LT(m.mean_final_yaw_error_deg, 2.0);
}

TEST(Evaluate, ZeroPolicyFailsHoverAtOffset) {
  EvalConfig cfg;
  cfg.env.observation_noise = false;
  cfg.n_episodes = 50;
  cfg.seed = 7;
  PolicyExecutor exec(PolicyWeights::zeros());
  const EvalMetrics m = evaluate_hover(exec, cfg);
  // zero action is exact hover thrust: the vehicle parks at its reset offset
  EXPECT_DOUBLE_EQ(m.success_rate, 0.0);
  EXPECT_GT(m.mean_final_position_error, 0.5);
}

TEST(Evaluate, SameSeedSameMetrics) {
  EvalConfig cfg;
  cfg.n_episodes = 5;
  cfg.env.limits.horizon = 200;
  cfg.seed = 42;
  PolicyExecutor a(PolicyWeights::init(7)), b(PolicyWeights::init(7));
  const EvalMetrics ma = evaluate_hover(a, cfg);
  const EvalMetrics mb = evaluate_hover(b, cfg);
  EXPECT_EQ(ma.success_rate, mb.success_rate);
  EXPECT_EQ(ma.mean_final_position_error, mb.mean_final_position_error);
  EXPECT_EQ(ma.mean_final_yaw_error_deg, mb.mean_final_yaw_error_deg);
}

TEST(Weights, FlatRoundTrip) {
  PolicyWeights w = PolicyWeights::init(1);
  const Eigen::VectorXd flat = w.to_flat();
  PolicyWeights w2 = PolicyWeights::zeros();
  w2.from_flat(flat);
  EXPECT_EQ(w2.to_flat(), flat);
  EXPECT_EQ(w.param_count(), 17 * 64 + 64 + 64 * 64 + 64 + 64 * 4 + 4    // actor
                                 + 17 * 64 + 64 + 64 * 64 + 64 + 64 + 1  // critic
                                 + 4);                                   // log_std
}
