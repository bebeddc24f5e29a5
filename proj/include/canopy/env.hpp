#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <random>
#include <stdexcept>

#include "canopy/angles.hpp"
#include "canopy/quadrotor.hpp"

namespace canopy {

/// Tracked reference: target position plus target yaw.
struct ViewPoseRef {
  Eigen::Vector3d position{0.0, 0.0, 0.0};  // m, inertial
  double yaw_deg = 0.0;                     // [-180, 180)
};

inline ViewPoseRef make_view_pose(const Eigen::Vector3d& p, double yaw_deg) {
  return ViewPoseRef{p, wrap_deg(yaw_deg)};
}

/// Gaussian observation noise magnitudes.
struct NoiseConfig {
  double sigma_p = 1e-3;
  double sigma_q = 2e-3;
  double sigma_v = 1e-3;
  double sigma_w = 2e-3;
};

// Observation layout (17): position error in B (3), error quaternion wxyz (4),
// linear velocity in B (3), angular velocity in B (3), last action (4).
struct Observation {
  Eigen::Matrix<double, 17, 1> vec = Eigen::Matrix<double, 17, 1>::Zero();

  Eigen::Vector3d position_error() const { return vec.segment<3>(0); }
  Eigen::Vector4d error_quaternion() const { return vec.segment<4>(3); }
  Eigen::Vector3d linear_velocity() const { return vec.segment<3>(7); }
  Eigen::Vector3d angular_velocity() const { return vec.segment<3>(10); }
  Eigen::Vector4d last_action() const { return vec.segment<4>(13); }

  static constexpr int kDim = 17;
};

struct RewardBreakdown {
  double survival = 0.0;            // s^R
  double horizontal = 0.0;          // e_xy^R
  double vertical = 0.0;            // e_z^R
  double velocity = 0.0;            // v^R
  double geodesic = 0.0;            // theta^R
  double smoothness_penalty = 0.0;  // a_delta^P
  double total = 0.0;
};

enum class TerminationStatus {
  Running,
  FailurePositionBound,
  FailureAttitude,
  FailureNonFinite,
  TimeLimit,
};

inline const char* to_string(TerminationStatus s) {
  switch (s) {
    case TerminationStatus::Running: return "running";
    case TerminationStatus::FailurePositionBound: return "failure_position_bound";
    case TerminationStatus::FailureAttitude: return "failure_attitude";
    case TerminationStatus::FailureNonFinite: return "failure_non_finite";
    case TerminationStatus::TimeLimit: return "time_limit";
  }
  return "unknown";
}

/// Pure-yaw rotation about the inertial z axis.
inline Eigen::Quaterniond yaw_quaternion(double yaw_deg) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(deg2rad(yaw_deg), Eigen::Vector3d::UnitZ()));
}

/// Shortest rotation angle of an error quaternion, theta = 2*atan2(|v|, w),
/// after canonicalizing to w >= 0. Result in [0, pi].
inline double geodesic_angle(const Eigen::Quaterniond& q_err) {
  double w = q_err.w();
  Eigen::Vector3d v = q_err.vec();
  if (w < 0.0) {
    w = -w;
    v = -v;
  }
  return 2.0 * std::atan2(v.norm(), w);
}

/// Error quaternion of the state attitude against the yaw-only reference
/// attitude: q_e = conj(q_ref) (x) q.
inline Eigen::Quaterniond error_quaternion(const Eigen::Quaterniond& attitude, double ref_yaw_deg) {
  return yaw_quaternion(ref_yaw_deg).conjugate() * attitude;
}

/// Body-frame observation of the tracking error. Gaussian noise is added per
/// component to everything except the last action.
inline Observation observe(const QuadrotorState& s, const ViewPoseRef& ref,
                           const Eigen::Vector4d& last_action, std::mt19937_64& rng,
                           const NoiseConfig& noise) {
  const Eigen::Matrix3d R_ib = s.attitude.toRotationMatrix().transpose();  // inertial -> body
  const Eigen::Vector3d e_p = R_ib * (s.position - ref.position);
  const Eigen::Quaterniond q_e = error_quaternion(s.attitude, ref.yaw_deg);
  const Eigen::Vector3d v_b = R_ib * s.linear_velocity;

  std::normal_distribution<double> gauss(0.0, 1.0);
  auto noisy = [&](double x, double sigma) { return sigma > 0.0 ? x + sigma * gauss(rng) : x; };

  Observation o;
  for (int i = 0; i < 3; ++i) o.vec(i) = noisy(e_p(i), noise.sigma_p);
  const Eigen::Vector4d qe(q_e.w(), q_e.x(), q_e.y(), q_e.z());
  for (int i = 0; i < 4; ++i) o.vec(3 + i) = noisy(qe(i), noise.sigma_q);
  for (int i = 0; i < 3; ++i) o.vec(7 + i) = noisy(v_b(i), noise.sigma_v);
  for (int i = 0; i < 3; ++i) o.vec(10 + i) = noisy(s.angular_velocity(i), noise.sigma_w);
  o.vec.segment<4>(13) = last_action;
  return o;
}

inline Observation observe_noiseless(const QuadrotorState& s, const ViewPoseRef& ref,
                                     const Eigen::Vector4d& last_action) {
  std::mt19937_64 rng(0);
  return observe(s, ref, last_action, rng, NoiseConfig{0.0, 0.0, 0.0, 0.0});
}

// R = s^R + 0.25 e_xy^R + 0.25 e_z^R + 0.15 v^R + 0.2 theta^R - 0.02 a_delta^P,
// evaluated on the noiseless inertial-frame state. Position and geodesic terms
// are dual-bandwidth exponentials (wide term for gradient, narrow for
// terminal precision).
inline RewardBreakdown compute_reward(const QuadrotorState& s, const ViewPoseRef& ref,
                                      const Eigen::Vector4d& action,
                                      const Eigen::Vector4d& last_action) {
  RewardBreakdown r;
  r.survival = 0.01;

  const double exy2 = (s.position.head<2>() - ref.position.head<2>()).squaredNorm();
  r.horizontal = 0.6 * std::exp(-4.0 * exy2) + 0.4 * std::exp(-150.0 * exy2);

  const double ez = s.position.z() - ref.position.z();
  r.vertical = 0.6 * std::exp(-4.0 * ez * ez) + 0.4 * std::exp(-150.0 * ez * ez);

  r.velocity = std::exp(-1.5 * s.linear_velocity.squaredNorm());

  const double theta = geodesic_angle(error_quaternion(s.attitude, ref.yaw_deg));
  r.geodesic = 0.6 * std::exp(-0.5 * theta * theta) + 0.4 * std::exp(-150.0 * theta * theta);

  r.smoothness_penalty = (action - last_action).squaredNorm();

  r.total = r.survival + 0.25 * r.horizontal + 0.25 * r.vertical + 0.15 * r.velocity +
            0.2 * r.geodesic - 0.02 * r.smoothness_penalty;
  return r;
}

struct TerminationLimits {
  double position_bound = 3.0;  // m, |p - p*|
  double max_tilt_deg = 90.0;   // body z vs inertial z
  int horizon = 1500;           // control steps
};

inline TerminationStatus check_termination(const QuadrotorState& s, const ViewPoseRef& ref,
                                           int step_count, const TerminationLimits& lim) {
  if (!is_finite(s)) return TerminationStatus::FailureNonFinite;
  if ((s.position - ref.position).norm() > lim.position_bound)
    return TerminationStatus::FailurePositionBound;
  // cos(tilt) is the (2,2) entry of the body->inertial rotation matrix
  const Eigen::Vector3d body_z = s.attitude * Eigen::Vector3d::UnitZ();
  if (body_z.z() < std::cos(deg2rad(lim.max_tilt_deg))) return TerminationStatus::FailureAttitude;
  if (step_count >= lim.horizon) return TerminationStatus::TimeLimit;
  return TerminationStatus::Running;
}

/// Initial state for training/evaluation episodes: position uniform in a
/// vertical cylinder (radius 2 m, height 2 m) centered on the reference,
/// level attitude with uniform random yaw, zero velocities.
inline QuadrotorState sample_reset_state(std::mt19937_64& rng, const ViewPoseRef& ref,
                                         double cylinder_radius = 2.0,
                                         double cylinder_height = 2.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = cylinder_radius * std::sqrt(unit(rng));  // area-uniform disk
  const double phi = 2.0 * kPi * unit(rng);
  const double dz = cylinder_height * (unit(rng) - 0.5);
  const double yaw = 360.0 * unit(rng) - 180.0;

  QuadrotorState s;
  s.position = ref.position + Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), dz);
  s.attitude = yaw_quaternion(yaw);
  s.linear_velocity.setZero();
  s.angular_velocity.setZero();
  s.time = 0.0;
  return s;
}

struct EnvConfig {
  PhysicalParams params;
  NoiseConfig noise;
  TerminationLimits limits;
  bool observation_noise = true;  // evaluation flag: false disables noise
  ViewPoseRef train_reference = ViewPoseRef{{0.0, 0.0, 1.0}, 0.0};
  bool randomize_reference_yaw = true;  // sample target yaw per episode
  double reset_cylinder_radius = 2.0;
  double reset_cylinder_height = 2.0;
};

struct StepResult {
  Observation observation;
  RewardBreakdown reward;
  TerminationStatus status = TerminationStatus::Running;
};

// One POMDP episode loop around the rigid-body simulator. Instances own all
// of their state; run as many in parallel as needed.
class InspectionEnv {
 public:
  InspectionEnv(EnvConfig cfg, uint64_t seed) : cfg_(cfg), rng_(seed) {
    cfg_.params.validate();
  }

  /// Randomized training reset around the configured reference.
  Observation reset() {
    ViewPoseRef ref = cfg_.train_reference;
    if (cfg_.randomize_reference_yaw) {
      std::uniform_real_distribution<double> u(-180.0, 180.0);
      ref.yaw_deg = wrap_deg(u(rng_));
    }
    return reset(ref);
  }

  /// Randomized reset around an explicit reference.
  Observation reset(const ViewPoseRef& ref) {
    return reset_at(sample_reset_state(rng_, ref, cfg_.reset_cylinder_radius,
                                       cfg_.reset_cylinder_height),
                    ref);
  }

  /// Deterministic reset to a given state (mission execution, evaluation).
  Observation reset_at(const QuadrotorState& state, const ViewPoseRef& ref) {
    state_ = state;
    reference_ = ref;
    last_action_.setZero();
    step_count_ = 0;
    return make_observation();
  }

  /// Reference may vary between steps (trajectory tracking).
  void set_reference(const ViewPoseRef& ref) { reference_ = ref; }

  StepResult step(const Eigen::Vector4d& action) {
    if ((action.array().abs() > 1.0).any() || !action.allFinite())
      throw std::invalid_argument("InspectionEnv::step: action outside [-1,1]^4");

    StepResult res;
    const Eigen::Vector4d rpm = action_to_rpm(action, cfg_.params);
    bool blowup = false;
    try {
      state_ = step_control_period(state_, rpm, cfg_.params);
    } catch (const IntegrationBlowup&) {
      blowup = true;
    }
    ++step_count_;

    res.reward = compute_reward(state_, reference_, action, last_action_);
    last_action_ = action;
    res.observation = make_observation();
    res.status = blowup ? TerminationStatus::FailureNonFinite
                        : check_termination(state_, reference_, step_count_, cfg_.limits);
    return res;
  }

  const QuadrotorState& state() const { return state_; }
  const ViewPoseRef& reference() const { return reference_; }
  const Eigen::Vector4d& last_action() const { return last_action_; }
  int step_count() const { return step_count_; }
  const EnvConfig& config() const { return cfg_; }
  void set_observation_noise(bool on) { cfg_.observation_noise = on; }

 private:
  Observation make_observation() {
    if (cfg_.observation_noise)
      return observe(state_, reference_, last_action_, rng_, cfg_.noise);
    return observe_noiseless(state_, reference_, last_action_);
  }

  EnvConfig cfg_;
  QuadrotorState state_;
  ViewPoseRef reference_;
  Eigen::Vector4d last_action_ = Eigen::Vector4d::Zero();
  std::mt19937_64 rng_;
  int step_count_ = 0;
};

}  // namespace canopy
