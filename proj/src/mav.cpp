#include "cotrans/mav.hpp"
#include "cotrans/mutation.hpp"
#include "cotrans/errors.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace cotrans {

AllocationMatrix build_allocation(const RotorGeometry &geo) {
  AllocationMatrix A(4, geo.rotor_count);
  for (int i = 0; i < geo.rotor_count; ++i) {
    const double ang = 2.0 * std::numbers::pi * i / geo.rotor_count;
    const double dir = (i % 2 == 0) ? 1.0 : -1.0;
    A(0, i) = geo.thrust_coeff * geo.arm_length * std::sin(ang);
    A(1, i) = -geo.thrust_coeff * geo.arm_length * std::cos(ang);
    A(2, i) = dir * geo.moment_coeff;
    A(3, i) = geo.thrust_coeff;
  }
  return A;
}

MavParams::MavParams() { derive_attitude_gains(); }

void MavParams::derive_attitude_gains() {
  const double wn = 2.0 / tau_att;
  omega_n = Vec3::Constant(wn);
  xi = Vec3::Ones();
  k_att = Vec3::Ones();
  K_P_att = J * wn * wn;
  K_D_att = J * 2.0 * wn;
}

void MavParams::validate() const {
  auto pos = [](double x) { return x > 0.0 && std::isfinite(x); };
  bool ok = pos(m) && pos(F_prop_max) && pos(tau_att) && pos(tau_est) &&
            pos(m_bar) && (J.array() > 0).all() && (K_P.array() > 0).all() &&
            (K_D.array() > 0).all() && (K_P_att.array() > 0).all() &&
            (K_D_att.array() > 0).all() && (omega_n.array() > 0).all();
  ok = ok && phi_cmd_max > 0 && phi_cmd_max < std::numbers::pi / 2 &&
       theta_cmd_max > 0 && theta_cmd_max < std::numbers::pi / 2;
  if (!ok)
    throw ConfigError("MavParams: non-positive or out-of-range parameter");
  if (allocation.cols() != rotors.rotor_count)
    throw DimensionMismatch("MavParams: allocation does not match rotor count");
}

PropWrench allocate_wrench(const RotorSpeeds &n, const MavParams &params) {
  if (n.size() != params.allocation.cols())
    throw DimensionMismatch("allocate_wrench: rotor count mismatch");
  const Eigen::Vector4d U = params.allocation * n.cwiseAbs2();
  return {U[3], U.head<3>()};
}

RotorSpeeds rotor_speeds_for_wrench(const PropWrench &w, const MavParams &params) {
  const Eigen::MatrixXd A = params.allocation;
  Eigen::VectorXd n2 = A.completeOrthogonalDecomposition().solve(w.U());
  return n2.cwiseMax(0.0).cwiseSqrt();
}

Vec3 aero_drag(const Vec3 &v_body, double sum_n2, double k_drag) {
  return k_drag * sum_n2 * Vec3(v_body.x(), v_body.y(), 0.0);
}

Vec3 translational_dynamics(const AgentState &state, double F_prop,
                            const Vec3 &F_ext, const RotorSpeeds &n,
                            const MavParams &params) {
  const Mat3 R = quat_to_rotmat(state.q);
  const Vec3 v_body = R.transpose() * state.v;
  const Vec3 drag = aero_drag(v_body, n.squaredNorm(), params.k_drag);
  return R * (Vec3(0.0, 0.0, F_prop) - drag) / params.m + F_ext / params.m -
         gravity_vector();
}

Vec3 rotational_dynamics(const Vec3 &omega, const Vec3 &M_prop, const Vec3 &M_ext,
                         const Vec3 &J) {
  const Vec3 Jw = J.cwiseProduct(omega);
  return (M_prop - omega.cross(Jw) + M_ext).cwiseQuotient(J);
}

double reduced_attitude_dynamics(double angle, double rate, double cmd,
                                 double M_ext, const MavParams &params,
                                 int axis) {
  const double wn = params.omega_n[axis];
  return wn * wn * (params.k_att[axis] * cmd - angle) -
         mutation_sign(Mutation::AttitudeDamping) * 2.0 * params.xi[axis] * wn * rate +
         M_ext / params.J[axis];
}

double attitude_closed_loop(double angle, double rate, double cmd,
                            const MavParams &params, int axis) {
  return (params.K_P_att[axis] * (cmd - angle) - params.K_D_att[axis] * rate) /
         params.J[axis];
}

Vec3 pd_position_control(const AgentState &state, const Vec3 &Lambda_r,
                         const Vec3 &Lambda_r_dot, const MavParams &params,
                         double feedforward_mass) {
  return params.K_P.cwiseProduct(Lambda_r - state.p) +
         params.K_D.cwiseProduct(Lambda_r_dot - state.v) +
         feedforward_mass * gravity_vector();
}

AttitudeCommand thrust_to_attitude(const Vec3 &F_cmd, double yaw,
                                   const MavParams &params) {
  const double norm = F_cmd.norm();
  if (norm < 1e-9)
    throw ZeroThrust("thrust_to_attitude: commanded force vanishes");
  const double c = std::cos(yaw), s = std::sin(yaw);
  const Vec3 Fb(c * F_cmd.x() + s * F_cmd.y(), -s * F_cmd.x() + c * F_cmd.y(),
                F_cmd.z());
  AttitudeCommand out;
  out.roll = -std::asin(std::clamp(Fb.y() / norm, -1.0, 1.0));
  out.pitch = std::atan2(Fb.x(), Fb.z());
  out.roll = std::clamp(out.roll, -params.phi_cmd_max, params.phi_cmd_max);
  out.pitch = std::clamp(out.pitch, -params.theta_cmd_max, params.theta_cmd_max);
  out.thrust = std::min(norm, params.F_prop_max);
  return out;
}

Vec3 thrust_in_world(double roll, double pitch, double yaw, double thrust) {
  const Vec3 tb(std::sin(pitch) * std::cos(roll), -std::sin(roll),
                std::cos(pitch) * std::cos(roll));
  const double c = std::cos(yaw), s = std::sin(yaw);
  return thrust * Vec3(c * tb.x() - s * tb.y(), s * tb.x() + c * tb.y(), tb.z());
}

Vec3 saturate_thrust_vector(const Vec3 &F, const MavParams &params) {
  const double fx = std::sin(params.phi_cmd_max) * params.F_prop_max;
  const double fy = std::sin(params.theta_cmd_max) * params.F_prop_max;
  return {std::clamp(F.x(), -fx, fx), std::clamp(F.y(), -fy, fy), F.z()};
}

Vec3 thrust_vector_lag(const Vec3 &F_prop_W, const Vec3 &F_cmd_W,
                       const MavParams &params) {
  return (saturate_thrust_vector(F_cmd_W, params) - F_prop_W) / params.tau_att;
}

} // namespace cotrans
