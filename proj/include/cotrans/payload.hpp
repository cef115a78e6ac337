#pragma once

#include "cotrans/attitude.hpp"

#include <vector>

namespace cotrans {

struct PayloadParams {
  double m_p = 1.5;
  Vec3 J_p{0.1, 0.1, 0.2};
  std::vector<Vec3> attachments;  // r_PBi, payload frame
  std::vector<Mat3> R_PB;         // nominal agent-to-payload rotations
  Vec3 drag_F = Vec3::Zero();     // linear in payload-frame velocity
  Vec3 drag_M = Vec3::Zero();     // linear in payload-frame rate

  std::size_t agent_count() const { return attachments.size(); }
  void validate() const;
};

struct AgentAttitude {
  UnitQuaternion q;
  Vec3 omega = Vec3::Zero();
};

struct SystemState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  UnitQuaternion q;           // payload attitude R_WP
  Vec3 omega = Vec3::Zero();  // payload frame
  std::vector<AgentAttitude> agents;

  Mat3 R() const { return quat_to_rotmat(q); }
};

struct SystemInertia {
  double m_sys = 0.0;
  Mat3 J_sys = Mat3::Zero();
};

struct AgentKinematics {
  Vec3 p, v, a;
};

struct AgentWrench {
  Vec3 F = Vec3::Zero();
  Vec3 M = Vec3::Zero();
};

// Attachment points of a regular polygon with the given side length,
// centred on the payload origin. Two agents sit on the x axis.
std::vector<Vec3> regular_polygon(int n, double side);
// Thin uniform lamina spanning the polygon (rod for n = 2).
Vec3 polygon_plate_inertia(double mass, int n, double side);
PayloadParams polygon_payload(double mass, int n, double side);

SystemInertia system_mass_inertia(const PayloadParams &params,
                                  const std::vector<double> &agent_masses);

AgentKinematics agent_kinematics(const SystemState &sys, std::size_t i,
                                 const PayloadParams &params,
                                 const Vec3 &omega_dot, const Vec3 &v_dot);

AgentWrench total_agent_wrench(const std::vector<Vec3> &forces,
                               const PayloadParams &params);

struct PayloadAccel {
  Vec3 v_dot, omega_dot;
};

PayloadAccel payload_dynamics(const SystemState &sys, const Vec3 &F_agents,
                              const Vec3 &M_agents, const SystemInertia &inertia,
                              const PayloadParams &params);

Vec3 joint_interaction_force(const Vec3 &a_i, const Vec3 &F_prop_i, double m_i);

} // namespace cotrans
