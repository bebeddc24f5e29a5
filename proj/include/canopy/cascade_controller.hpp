#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "canopy/angles.hpp"
#include "canopy/env.hpp"
#include "canopy/quadrotor.hpp"

namespace canopy {

struct CascadeGains {
  Eigen::Vector3d kp_pos{11.0, 11.0, 14.0};
  Eigen::Vector3d kd_pos{5.5, 5.5, 6.0};
  Eigen::Vector3d kp_att{280.0, 280.0, 60.0};
  Eigen::Vector3d kd_att{28.0, 28.0, 14.0};
  double max_horizontal_accel = 5.0;  // m/s^2
  double max_climb_accel = 7.0;
  double max_descend_accel = 4.0;
};

// Classical cascade: PD position loop producing a desired force direction,
// quaternion attitude loop producing body torques, then allocation to the
// four motors. Emits the same normalized action as the learned policy.
// Deterministic and stateless; saturates instead of erroring.
class CascadeController {
 public:
  CascadeController() = default;
  CascadeController(const PhysicalParams& params, const CascadeGains& gains)
      : params_(params), gains_(gains) {}

  /// Feedforward terms default to zero, which is the plain step-tracking
  /// configuration. Stream tracking passes reference velocity (and optionally
  /// acceleration / yaw rate) for low-lag tracking of moving references.
  Eigen::Vector4d control(const QuadrotorState& s, const ViewPoseRef& ref,
                          const Eigen::Vector3d& vel_ff = Eigen::Vector3d::Zero(),
                          const Eigen::Vector3d& acc_ff = Eigen::Vector3d::Zero(),
                          double yaw_rate_ff = 0.0) const {
    // --- position loop -> desired acceleration ---
    Eigen::Vector3d a_des = gains_.kp_pos.cwiseProduct(ref.position - s.position) +
                            gains_.kd_pos.cwiseProduct(vel_ff - s.linear_velocity) + acc_ff;
    const double ah = a_des.head<2>().norm();
    if (ah > gains_.max_horizontal_accel) a_des.head<2>() *= gains_.max_horizontal_accel / ah;
    a_des.z() = std::clamp(a_des.z(), -gains_.max_descend_accel, gains_.max_climb_accel);

    // --- desired force and attitude ---
    Eigen::Vector3d f_des = params_.mass * (a_des + Eigen::Vector3d(0, 0, params_.gravity));
    if (f_des.z() < 0.1 * params_.mass * params_.gravity)
      f_des.z() = 0.1 * params_.mass * params_.gravity;  // never command flipping over

    const Eigen::Vector3d z_des = f_des.normalized();
    const double yaw = deg2rad(ref.yaw_deg);
    const Eigen::Vector3d x_c(std::cos(yaw), std::sin(yaw), 0.0);
    Eigen::Vector3d y_des = z_des.cross(x_c);
    const double yn = y_des.norm();
    if (yn < 1e-9) {
      // desired z parallel to commanded heading; fall back to yaw frame y
      y_des = Eigen::Vector3d(-std::sin(yaw), std::cos(yaw), 0.0);
    } else {
      y_des /= yn;
    }
    const Eigen::Vector3d x_des = y_des.cross(z_des);
    Eigen::Matrix3d r_des;
    r_des.col(0) = x_des;
    r_des.col(1) = y_des;
    r_des.col(2) = z_des;
    const Eigen::Quaterniond q_des(r_des);

    // collective thrust along the actual body z
    const Eigen::Vector3d z_body = s.attitude * Eigen::Vector3d::UnitZ();
    double thrust = f_des.dot(z_body);

    // --- attitude loop -> body torques ---
    Eigen::Quaterniond q_err = s.attitude.conjugate() * q_des;
    if (q_err.w() < 0.0) q_err.coeffs() = -q_err.coeffs();
    const double angle = 2.0 * std::atan2(q_err.vec().norm(), q_err.w());
    Eigen::Vector3d e_att = Eigen::Vector3d::Zero();
    if (q_err.vec().norm() > 1e-12) e_att = angle * q_err.vec().normalized();

    const Eigen::Vector3d omega_ff(0.0, 0.0, yaw_rate_ff);
    const Eigen::Vector3d& inertia = params_.inertia_diagonal;
    const Eigen::Vector3d torque =
        inertia.cwiseProduct(gains_.kp_att.cwiseProduct(e_att) -
                             gains_.kd_att.cwiseProduct(s.angular_velocity - omega_ff)) +
        s.angular_velocity.cross(inertia.cwiseProduct(s.angular_velocity));

    return allocate(thrust, torque);
  }

  /// Thrust + torques to normalized per-motor actions (x-configuration mix).
  Eigen::Vector4d allocate(double thrust, const Eigen::Vector3d& torque) const {
    const double arm = params_.arm_length / std::sqrt(2.0);
    const double c = params_.moment_coeff / params_.thrust_coeff;
    const double tx = torque.x() / (4.0 * arm);
    const double ty = torque.y() / (4.0 * arm);
    const double tz = torque.z() / (4.0 * c);
    const double t4 = thrust / 4.0;

    Eigen::Vector4d f(t4 - tx - ty - tz,
                      t4 + tx - ty + tz,
                      t4 + tx + ty - tz,
                      t4 - tx + ty + tz);

    const double h = hover_rpm(params_);
    const double f_hover = params_.thrust_coeff * h * h;
    Eigen::Vector4d action;
    for (int i = 0; i < 4; ++i) {
      const double fi = std::clamp(f(i), 0.25 * f_hover, 2.25 * f_hover);
      const double rpm = std::sqrt(fi / params_.thrust_coeff);
      action(i) = std::clamp(2.0 * (rpm / h - 1.0), -1.0, 1.0);
    }
    return action;
  }

  const PhysicalParams& params() const { return params_; }
  const CascadeGains& gains() const { return gains_; }

 private:
  PhysicalParams params_;
  CascadeGains gains_;
};

}  // namespace canopy
