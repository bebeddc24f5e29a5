#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

namespace canopy {

// Crazyflie 2.1, x configuration. Thrust/moment coefficients are per RPM^2.
struct PhysicalParams {
  double mass = 0.033;                   // kg
  double arm_length = 39.73e-3;          // m, hub to motor
  double thrust_coeff = 3.16e-10;        // N / RPM^2
  double moment_coeff = 7.49e-12;        // N*m / RPM^2
  double propeller_radius = 23.1348e-3;  // m
  double gravity = 9.81;                 // m/s^2
  // Not part of the published parameter set; standard Crazyflie 2.x values.
  Eigen::Vector3d inertia_diagonal{1.395e-5, 1.436e-5, 2.173e-5};  // kg*m^2

  void validate() const {
    const bool ok = mass > 0.0 && arm_length > 0.0 && thrust_coeff > 0.0 &&
                    moment_coeff > 0.0 && propeller_radius > 0.0 && gravity > 0.0 &&
                    (inertia_diagonal.array() > 0.0).all();
    if (!ok) throw std::invalid_argument("PhysicalParams: all parameters must be positive");
  }
};

// Ground-truth simulator state. Attitude maps body frame B to inertial frame I.
struct QuadrotorState {
  Eigen::Vector3d position{0.0, 0.0, 0.0};         // m, inertial
  Eigen::Quaterniond attitude{1.0, 0.0, 0.0, 0.0};  // unit, body -> inertial
  Eigen::Vector3d linear_velocity{0.0, 0.0, 0.0};   // m/s, inertial
  Eigen::Vector3d angular_velocity{0.0, 0.0, 0.0};  // rad/s, body
  double time = 0.0;                                // s
};

inline bool is_finite(const QuadrotorState& s) {
  return s.position.allFinite() && s.attitude.coeffs().allFinite() &&
         s.linear_velocity.allFinite() && s.angular_velocity.allFinite() &&
         std::isfinite(s.time);
}

struct IntegrationBlowup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kRpmLimit = 65535.0;
constexpr double kPhysicsDt = 1e-3;   // integrator substep
constexpr double kControlDt = 1e-2;   // 100 Hz agent/controller loop
constexpr int kSubstepsPerControl = 10;

/// RPM at which four rotors exactly cancel gravity: sqrt(g*m / (4*k_f)).
inline double hover_rpm(const PhysicalParams& p) {
  return std::sqrt(p.gravity * p.mass / (4.0 * p.thrust_coeff));
}

/// Normalized action in [-1,1]^4 to per-motor RPM: rpm_i = hover * (1 + a_i/2).
inline Eigen::Vector4d action_to_rpm(const Eigen::Vector4d& action, const PhysicalParams& p) {
  if ((action.array().abs() > 1.0).any() || !action.allFinite())
    throw std::invalid_argument("action_to_rpm: action outside [-1,1]^4");
  const double h = hover_rpm(p);
  Eigen::Vector4d rpm = h * (1.0 + 0.5 * action.array());
  return rpm.cwiseMax(0.0).cwiseMin(kRpmLimit);
}

/// Normalized action paired with the RPM it maps to.
struct MotorCommand {
  Eigen::Vector4d normalized_action;
  Eigen::Vector4d rpm;

  static MotorCommand from_action(const Eigen::Vector4d& a, const PhysicalParams& p) {
    return MotorCommand{a, action_to_rpm(a, p)};
  }
};

struct BodyWrench {
  Eigen::Vector3d thrust;  // N, body frame (thrust acts along +z)
  Eigen::Vector3d torque;  // N*m, body frame
};

// Rotor layout (top view, x forward / y left), numbered counter-clockwise
// from front-right: 1 front-right (CCW), 2 front-left (CW), 3 back-left
// (CCW), 4 back-right (CW). A CCW rotor reacts a -z torque on the body.
// Moment arm about each body axis is d/sqrt(2).
inline BodyWrench rpm_to_wrench(const Eigen::Vector4d& rpm, const PhysicalParams& p) {
  const Eigen::Vector4d f = p.thrust_coeff * rpm.array().square();  // per-rotor thrust
  const double arm = p.arm_length / std::sqrt(2.0);
  const double c = p.moment_coeff / p.thrust_coeff;  // yaw torque per unit thrust

  BodyWrench w;
  w.thrust = Eigen::Vector3d(0.0, 0.0, f.sum());
  w.torque.x() = arm * (-f(0) + f(1) + f(2) - f(3));
  w.torque.y() = arm * (-f(0) - f(1) + f(2) + f(3));
  w.torque.z() = c * (-f(0) + f(1) - f(2) + f(3));
  return w;
}

namespace detail {

struct StateDeriv {
  Eigen::Vector3d dp;
  Eigen::Vector4d dq;  // (w,x,y,z) order
  Eigen::Vector3d dv;
  Eigen::Vector3d dw;
};

inline StateDeriv dynamics_deriv(const Eigen::Vector3d& v, const Eigen::Quaterniond& q,
                                 const Eigen::Vector3d& omega, const BodyWrench& wrench,
                                 const PhysicalParams& p) {
  StateDeriv d;
  d.dp = v;
  d.dv = Eigen::Vector3d(0.0, 0.0, -p.gravity) +
         q.normalized() * wrench.thrust / p.mass;
  // qdot = 0.5 * q (x) (0, omega)
  const Eigen::Quaterniond qw = q * Eigen::Quaterniond(0.0, omega.x(), omega.y(), omega.z());
  d.dq = 0.5 * Eigen::Vector4d(qw.w(), qw.x(), qw.y(), qw.z());
  const Eigen::Vector3d J = p.inertia_diagonal;
  d.dw = (wrench.torque - omega.cross(J.cwiseProduct(omega))).cwiseQuotient(J);
  return d;
}

}  // namespace detail

/// One RK4 step of the Newton-Euler dynamics under constant rotor speeds.
/// The quaternion is renormalized after the step. Throws IntegrationBlowup
/// if the resulting state is not finite.
inline QuadrotorState step_dynamics(const QuadrotorState& s, const Eigen::Vector4d& rpm,
                                    double dt, const PhysicalParams& p) {
  if (dt <= 0.0) throw std::invalid_argument("step_dynamics: dt must be positive");
  const BodyWrench wrench = rpm_to_wrench(rpm, p);

  const Eigen::Vector4d q0(s.attitude.w(), s.attitude.x(), s.attitude.y(), s.attitude.z());
  auto quat = [](const Eigen::Vector4d& c) {
    return Eigen::Quaterniond(c(0), c(1), c(2), c(3));
  };

  using detail::StateDeriv;
  const StateDeriv k1 = detail::dynamics_deriv(s.linear_velocity, s.attitude,
                                               s.angular_velocity, wrench, p);
  const StateDeriv k2 = detail::dynamics_deriv(
      s.linear_velocity + 0.5 * dt * k1.dv, quat(q0 + 0.5 * dt * k1.dq),
      s.angular_velocity + 0.5 * dt * k1.dw, wrench, p);
  const StateDeriv k3 = detail::dynamics_deriv(
      s.linear_velocity + 0.5 * dt * k2.dv, quat(q0 + 0.5 * dt * k2.dq),
      s.angular_velocity + 0.5 * dt * k2.dw, wrench, p);
  const StateDeriv k4 = detail::dynamics_deriv(
      s.linear_velocity + dt * k3.dv, quat(q0 + dt * k3.dq),
      s.angular_velocity + dt * k3.dw, wrench, p);

  QuadrotorState out;
  out.position = s.position + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  out.linear_velocity = s.linear_velocity + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  out.angular_velocity = s.angular_velocity + dt / 6.0 * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
  const Eigen::Vector4d q = q0 + dt / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
  out.attitude = quat(q).normalized();
  out.time = s.time + dt;

  if (!is_finite(out)) throw IntegrationBlowup("step_dynamics: state diverged");
  return out;
}

/// Advance one 100 Hz control period (10 x 1 ms RK4 substeps) under fixed RPM.
inline QuadrotorState step_control_period(const QuadrotorState& s, const Eigen::Vector4d& rpm,
                                          const PhysicalParams& p) {
  QuadrotorState out = s;
  for (int i = 0; i < kSubstepsPerControl; ++i) out = step_dynamics(out, rpm, kPhysicsDt, p);
  return out;
}

}  // namespace canopy
