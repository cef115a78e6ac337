#pragma once

#include "cotrans/attitude.hpp"

#include <Eigen/Core>

namespace cotrans {

inline constexpr double kGravity = 9.81;
inline Vec3 gravity_vector() { return {0.0, 0.0, kGravity}; }

using AllocationMatrix = Eigen::Matrix<double, 4, Eigen::Dynamic>;

struct RotorGeometry {
  int rotor_count = 6;
  double arm_length = 0.25;     // m
  double thrust_coeff = 8.54858e-6; // N / (rad/s)^2
  double moment_coeff = 1.6e-2 * 8.54858e-6; // N m / (rad/s)^2
};

// Regular multirotor, rotor i at angle i * 2pi / count, spin alternating.
AllocationMatrix build_allocation(const RotorGeometry &geo);

struct MavParams {
  double m = 3.5;
  Vec3 J{0.05, 0.05, 0.09}; // assumed, no figure in the literature
  double k_drag = 5.0e-8;
  Vec3 K_drag{0.2, 0.2, 0.0};
  double F_prop_max = 70.0;
  double phi_cmd_max = 0.26;
  double theta_cmd_max = 0.26;
  double tau_att = 0.25;
  double tau_est = 0.2;
  double m_bar = 1.0;
  RotorGeometry rotors;
  AllocationMatrix allocation = build_allocation(RotorGeometry{});
  Vec3 K_P{17.0, 17.0, 30.0};
  Vec3 K_D{15.0, 15.0, 10.0};
  // Attitude loop per axis (roll, pitch, yaw).
  Vec3 K_P_att;
  Vec3 K_D_att;
  // Reduced attitude model constants per axis.
  Vec3 omega_n;
  Vec3 xi{1.0, 1.0, 1.0};
  Vec3 k_att{1.0, 1.0, 1.0};

  MavParams();
  // Critically damped attitude loop whose first-order equivalent time
  // constant is tau_att (natural frequency 2 / tau_att).
  void derive_attitude_gains();
  void validate() const;
};

struct AgentState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  UnitQuaternion q;
  Vec3 omega = Vec3::Zero();
};

using RotorSpeeds = Eigen::VectorXd;

struct PropWrench {
  double F_prop = 0.0;
  Vec3 M_prop = Vec3::Zero();

  Eigen::Vector4d U() const { return {M_prop[0], M_prop[1], M_prop[2], F_prop}; }
};

struct AttitudeCommand {
  double roll = 0.0;
  double pitch = 0.0;
  double thrust = 0.0;
};

PropWrench allocate_wrench(const RotorSpeeds &n, const MavParams &params);
// Least-squares inverse of the allocation, squared speeds clamped at zero.
RotorSpeeds rotor_speeds_for_wrench(const PropWrench &w, const MavParams &params);

// Lumped rotor drag in body frame from the sum of squared rotor speeds.
Vec3 aero_drag(const Vec3 &v_body, double sum_n2, double k_drag);

Vec3 translational_dynamics(const AgentState &state, double F_prop,
                            const Vec3 &F_ext, const RotorSpeeds &n,
                            const MavParams &params);
Vec3 rotational_dynamics(const Vec3 &omega, const Vec3 &M_prop, const Vec3 &M_ext,
                         const Vec3 &J);

// axis: 0 roll, 1 pitch, 2 yaw.
double reduced_attitude_dynamics(double angle, double rate, double cmd,
                                 double M_ext, const MavParams &params,
                                 int axis = 0);
double attitude_closed_loop(double angle, double rate, double cmd,
                            const MavParams &params, int axis = 0);

Vec3 pd_position_control(const AgentState &state, const Vec3 &Lambda_r,
                         const Vec3 &Lambda_r_dot, const MavParams &params,
                         double feedforward_mass);
inline Vec3 pd_position_control(const AgentState &state, const Vec3 &Lambda_r,
                                const Vec3 &Lambda_r_dot,
                                const MavParams &params) {
  return pd_position_control(state, Lambda_r, Lambda_r_dot, params, params.m);
}

AttitudeCommand thrust_to_attitude(const Vec3 &F_cmd, double yaw,
                                   const MavParams &params);
// World-frame thrust produced by a body with roll/pitch/yaw and collective thrust.
Vec3 thrust_in_world(double roll, double pitch, double yaw, double thrust);

// Lateral bounds on the world-frame thrust vector.
Vec3 saturate_thrust_vector(const Vec3 &F, const MavParams &params);
Vec3 thrust_vector_lag(const Vec3 &F_prop_W, const Vec3 &F_cmd_W,
                       const MavParams &params);

} // namespace cotrans
