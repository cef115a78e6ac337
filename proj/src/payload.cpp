#include "cotrans/payload.hpp"
#include "cotrans/mutation.hpp"

#include <Eigen/Cholesky>
#include "cotrans/errors.hpp"
#include "cotrans/mav.hpp"

#include <cmath>
#include <numbers>

namespace cotrans {

void PayloadParams::validate() const {
  if (!(m_p > 0.0) || !(J_p.array() > 0.0).all())
    throw ConfigError("PayloadParams: mass and inertia must be positive");
  if (attachments.empty())
    throw ConfigError("PayloadParams: at least one attachment required");
  if (!R_PB.empty() && R_PB.size() != attachments.size())
    throw DimensionMismatch("PayloadParams: R_PB count differs from attachments");
}

std::vector<Vec3> regular_polygon(int n, double side) {
  std::vector<Vec3> pts;
  if (n == 1) {
    pts.push_back(Vec3::Zero());
  } else if (n == 2) {
    pts.push_back(Vec3(0.5 * side, 0.0, 0.0));
    pts.push_back(Vec3(-0.5 * side, 0.0, 0.0));
  } else {
    const double R = side / (2.0 * std::sin(std::numbers::pi / n));
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n;
      pts.push_back(Vec3(R * std::cos(a), R * std::sin(a), 0.0));
    }
  }
  return pts;
}

Vec3 polygon_plate_inertia(double mass, int n, double side) {
  if (n <= 2) {
    const double jzz = mass * side * side / 12.0;
    return {1e-3 * jzz, jzz, jzz};
  }
  const double R = side / (2.0 * std::sin(std::numbers::pi / n));
  const double c = std::cos(std::numbers::pi / n);
  const double jzz = mass * R * R * (1.0 + 2.0 * c * c) / 6.0;
  return {0.5 * jzz, 0.5 * jzz, jzz};
}

PayloadParams polygon_payload(double mass, int n, double side) {
  PayloadParams p;
  p.m_p = mass;
  p.J_p = polygon_plate_inertia(mass, n, side);
  p.attachments = regular_polygon(n, side);
  p.R_PB.assign(p.attachments.size(), Mat3::Identity());
  return p;
}

SystemInertia system_mass_inertia(const PayloadParams &params,
                                  const std::vector<double> &agent_masses) {
  if (agent_masses.size() != params.attachments.size())
    throw DimensionMismatch("system_mass_inertia: agent count mismatch");
  SystemInertia out;
  out.m_sys = params.m_p;
  out.J_sys = params.J_p.asDiagonal();
  for (std::size_t i = 0; i < agent_masses.size(); ++i) {
    const Vec3 &r = params.attachments[i];
    out.m_sys += agent_masses[i];
    out.J_sys += agent_masses[i] *
                 (r.squaredNorm() * Mat3::Identity() -
                  mutation_sign(Mutation::InertiaParallelAxis) * r * r.transpose());
  }
  return out;
}

AgentKinematics agent_kinematics(const SystemState &sys, std::size_t i,
                                 const PayloadParams &params,
                                 const Vec3 &omega_dot, const Vec3 &v_dot) {
  if (i >= params.attachments.size())
    throw IndexOutOfRange("agent_kinematics: agent index out of range");
  const Mat3 R = sys.R();
  const Vec3 &r = params.attachments[i];
  const Vec3 wr = sys.omega.cross(r);
  return {sys.p + R * r, sys.v + R * wr,
          v_dot + R * (omega_dot.cross(r) + sys.omega.cross(wr))};
}

AgentWrench total_agent_wrench(const std::vector<Vec3> &forces,
                               const PayloadParams &params) {
  if (forces.size() != params.attachments.size())
    throw DimensionMismatch("total_agent_wrench: force count mismatch");
  AgentWrench w;
  for (std::size_t i = 0; i < forces.size(); ++i) {
    const Vec3 Fp = params.R_PB.empty() ? forces[i] : Vec3(params.R_PB[i] * forces[i]);
    w.F += Fp;
    w.M += params.attachments[i].cross(Fp);
  }
  return w;
}

PayloadAccel payload_dynamics(const SystemState &sys, const Vec3 &F_agents,
                              const Vec3 &M_agents, const SystemInertia &inertia,
                              const PayloadParams &params) {
  const Mat3 R = sys.R();
  const Vec3 F_drag = params.drag_F.cwiseProduct(R.transpose() * sys.v);
  const Vec3 M_drag = params.drag_M.cwiseProduct(sys.omega);
  PayloadAccel acc;
  acc.v_dot = R * (F_agents - F_drag) / inertia.m_sys -
              mutation_sign(Mutation::PayloadGravity) * gravity_vector();
  const double gyro = mutation_sign(Mutation::PayloadGyroscopic);
  acc.omega_dot = inertia.J_sys.ldlt().solve(
      M_agents - gyro * sys.omega.cross(inertia.J_sys * sys.omega) - M_drag);
  return acc;
}

Vec3 joint_interaction_force(const Vec3 &a_i, const Vec3 &F_prop_i, double m_i) {
  return m_i * (a_i + gravity_vector()) - F_prop_i;
}

} // namespace cotrans
