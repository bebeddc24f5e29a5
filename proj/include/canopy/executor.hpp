#pragma once

#include <Eigen/Dense>
#include <memory>

#include "canopy/cascade_controller.hpp"
#include "canopy/env.hpp"
#include "canopy/policy.hpp"

namespace canopy {

/// Reference plus feedforward for the current control step. Feedforward is
/// used by the classical controller only; the policy sees just the
/// observation, as in training.
struct ExecutorContext {
  ViewPoseRef reference;
  Eigen::Vector3d ref_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d ref_accel = Eigen::Vector3d::Zero();
  double ref_yaw_rate = 0.0;  // rad/s
};

class Executor {
 public:
  virtual ~Executor() = default;
  virtual Eigen::Vector4d act(const Observation& obs, const QuadrotorState& state,
                              const ExecutorContext& ctx) = 0;
  virtual void reset() {}
  virtual const char* name() const = 0;
};

/// Deterministic policy rollout: action = actor mean on the env observation.
class PolicyExecutor : public Executor {
 public:
  explicit PolicyExecutor(PolicyWeights weights) : weights_(std::move(weights)) {}

  Eigen::Vector4d act(const Observation& obs, const QuadrotorState&,
                      const ExecutorContext&) override {
    return actor_forward(obs, weights_);
  }

  const char* name() const override { return "policy"; }
  const PolicyWeights& weights() const { return weights_; }

 private:
  PolicyWeights weights_;
};

class BaselineExecutor : public Executor {
 public:
  explicit BaselineExecutor(const PhysicalParams& params,
                            const CascadeGains& gains = CascadeGains{})
      : controller_(params, gains) {}

  Eigen::Vector4d act(const Observation&, const QuadrotorState& state,
                      const ExecutorContext& ctx) override {
    return controller_.control(state, ctx.reference, ctx.ref_velocity, ctx.ref_accel,
                               ctx.ref_yaw_rate);
  }

  const char* name() const override { return "baseline"; }

 private:
  CascadeController controller_;
};

}  // namespace canopy
