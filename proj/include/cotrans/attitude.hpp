#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cotrans {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Hamilton quaternion, scalar-last storage (v, s).
struct UnitQuaternion {
  Vec3 v = Vec3::Zero();
  double s = 1.0;

  UnitQuaternion() = default;
  UnitQuaternion(const Vec3 &vec, double scalar) : v(vec), s(scalar) {}

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Vec3 &axis, double angle);

  double norm() const;
  UnitQuaternion normalized() const;
  UnitQuaternion conjugate() const { return {-v, s}; }
  // Same rotation with non-negative scalar part.
  UnitQuaternion canonical() const;
  // Rotation angle in [0, pi].
  double angle() const;
};

struct MrpConfig {
  double a = 1.0;
  double f = 4.0;

  static MrpConfig with_a(double a);
};

struct Mrp {
  Vec3 p = Vec3::Zero();
  MrpConfig cfg;
};

// Roll, pitch, yaw applied as Rz(yaw) * Ry(pitch) * Rx(roll).
struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  Vec3 vec() const { return {roll, pitch, yaw}; }
  static EulerAngles from_vec(const Vec3 &e) { return {e[0], e[1], e[2]}; }
};

Mat3 skew(const Vec3 &w);

UnitQuaternion quat_multiply(const UnitQuaternion &q1, const UnitQuaternion &q2);
UnitQuaternion quat_inverse(const UnitQuaternion &q);
Vec3 quat_rotate(const UnitQuaternion &q, const Vec3 &x);

Mat3 quat_to_rotmat(const UnitQuaternion &q);
UnitQuaternion rotmat_to_quat(const Mat3 &R);

Mat3 euler_to_rotmat(const EulerAngles &e);
EulerAngles rotmat_to_euler(const Mat3 &R);
EulerAngles quat_to_euler(const UnitQuaternion &q);
UnitQuaternion euler_to_quat(const EulerAngles &e);

// Maps body rates to Euler angle rates: eta_dot = W(eta) * omega.
Mat3 euler_rate_matrix(const EulerAngles &e);

Mrp quat_to_mrp(const UnitQuaternion &q, const MrpConfig &cfg = {});
UnitQuaternion mrp_to_quat(const Mrp &p);
UnitQuaternion mrp_to_quat(const Vec3 &p, const MrpConfig &cfg = {});

// Discrete propagation matrix acting on the stacked (v, s) vector so that
// Omega * q == q (x) dq(omega * Ts).
Eigen::Matrix4d omega_matrix(const Vec3 &omega, double Ts);
UnitQuaternion quat_integrate(const UnitQuaternion &q, const Vec3 &omega,
                              double Ts);

// Continuous kinematics q_dot = 0.5 * q (x) (omega, 0), stacked as (v, s).
Eigen::Vector4d quat_derivative(const UnitQuaternion &q, const Vec3 &omega);

inline Eigen::Vector4d stack(const UnitQuaternion &q) {
  return {q.v[0], q.v[1], q.v[2], q.s};
}
inline UnitQuaternion unstack(const Eigen::Vector4d &x) {
  return {x.head<3>(), x[3]};
}

} // namespace cotrans
