#include "cotrans/attitude.hpp"
#include "cotrans/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cotrans {

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3 &axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0)
    return identity();
  return {std::sin(0.5 * angle) * axis / n, std::cos(0.5 * angle)};
}

double UnitQuaternion::norm() const { return std::sqrt(v.squaredNorm() + s * s); }

UnitQuaternion UnitQuaternion::normalized() const {
  const double n = norm();
  return {v / n, s / n};
}

UnitQuaternion UnitQuaternion::canonical() const {
  return s < 0.0 ? UnitQuaternion{-v, -s} : *this;
}

double UnitQuaternion::angle() const {
  return 2.0 * std::atan2(v.norm(), std::abs(s));
}

MrpConfig MrpConfig::with_a(double a) { return {a, 2.0 * (a + 1.0)}; }

Mat3 skew(const Vec3 &w) {
  Mat3 S;
  S << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
  return S;
}

UnitQuaternion quat_multiply(const UnitQuaternion &q1, const UnitQuaternion &q2) {
  UnitQuaternion r{q1.s * q2.v + q2.s * q1.v + q1.v.cross(q2.v),
                   q1.s * q2.s - q1.v.dot(q2.v)};
  return r.normalized();
}

UnitQuaternion quat_inverse(const UnitQuaternion &q) { return q.conjugate(); }

Vec3 quat_rotate(const UnitQuaternion &q, const Vec3 &x) {
  const Vec3 t = 2.0 * q.v.cross(x);
  return x + q.s * t + q.v.cross(t);
}

Mat3 quat_to_rotmat(const UnitQuaternion &q) {
  const double s = q.s;
  const Vec3 &v = q.v;
  return (s * s - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() +
         2.0 * s * skew(v);
}

UnitQuaternion rotmat_to_quat(const Mat3 &R) {
  // Shepperd: pick the largest diagonal candidate for conditioning.
  const double tr = R.trace();
  const double cand[4] = {tr, R(0, 0), R(1, 1), R(2, 2)};
  const int k = static_cast<int>(std::max_element(cand, cand + 4) - cand);
  UnitQuaternion q;
  if (k == 0) {
    const double r = std::sqrt(1.0 + tr);
    q.s = 0.5 * r;
    q.v = Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1)) * (0.5 / r);
  } else {
    const int i = k - 1, j = (i + 1) % 3, l = (i + 2) % 3;
    const double r = std::sqrt(1.0 + R(i, i) - R(j, j) - R(l, l));
    q.v[i] = 0.5 * r;
    q.v[j] = (R(j, i) + R(i, j)) * (0.5 / r);
    q.v[l] = (R(l, i) + R(i, l)) * (0.5 / r);
    q.s = (R(l, j) - R(j, l)) * (0.5 / r);
  }
  return q.normalized().canonical();
}

Mat3 euler_to_rotmat(const EulerAngles &e) {
  const double cr = std::cos(e.roll), sr = std::sin(e.roll);
  const double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
  const double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
  Mat3 R;
  R << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp, cp * sr, cp * cr;
  return R;
}

EulerAngles rotmat_to_euler(const Mat3 &R) {
  EulerAngles e;
  e.pitch = -std::asin(std::clamp(R(2, 0), -1.0, 1.0));
  e.roll = std::atan2(R(2, 1), R(2, 2));
  e.yaw = std::atan2(R(1, 0), R(0, 0));
  return e;
}

EulerAngles quat_to_euler(const UnitQuaternion &q) {
  return rotmat_to_euler(quat_to_rotmat(q));
}

UnitQuaternion euler_to_quat(const EulerAngles &e) {
  const auto qz = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), e.yaw);
  const auto qy = UnitQuaternion::from_axis_angle(Vec3::UnitY(), e.pitch);
  const auto qx = UnitQuaternion::from_axis_angle(Vec3::UnitX(), e.roll);
  return quat_multiply(quat_multiply(qz, qy), qx);
}

Mat3 euler_rate_matrix(const EulerAngles &e) {
  const double cr = std::cos(e.roll), sr = std::sin(e.roll);
  const double cp = std::cos(e.pitch), tp = std::tan(e.pitch);
  Mat3 W;
  W << 1.0, sr * tp, cr * tp, 0.0, cr, -sr, 0.0, sr / cp, cr / cp;
  return W;
}

Mrp quat_to_mrp(const UnitQuaternion &q, const MrpConfig &cfg) {
  const double den = cfg.a + q.s;
  if (std::abs(den) < 1e-12)
    throw SingularMrp("quaternion maps to infinite MRP (a + q_s = 0)");
  return {cfg.f * q.v / den, cfg};
}

UnitQuaternion mrp_to_quat(const Vec3 &p, const MrpConfig &cfg) {
  const double a = cfg.a, f = cfg.f;
  const double p2 = p.squaredNorm();
  const double s =
      (-a * p2 + f * std::sqrt(f * f + (1.0 - a * a) * p2)) / (f * f + p2);
  UnitQuaternion q{(a + s) / f * p, s};
  return q.normalized().canonical();
}

UnitQuaternion mrp_to_quat(const Mrp &p) { return mrp_to_quat(p.p, p.cfg); }

Eigen::Matrix4d omega_matrix(const Vec3 &omega, double Ts) {
  const double wn = omega.norm();
  const double half = 0.5 * wn * Ts;
  Vec3 psi;
  if (half < 1e-8)
    psi = 0.5 * Ts * omega * (1.0 - half * half / 6.0);
  else
    psi = std::sin(half) * omega / wn;
  const double ups = std::cos(half);
  Eigen::Matrix4d Om;
  Om.topLeftCorner<3, 3>() = ups * Mat3::Identity() - skew(psi);
  Om.topRightCorner<3, 1>() = psi;
  Om.bottomLeftCorner<1, 3>() = -psi.transpose();
  Om(3, 3) = ups;
  return Om;
}

UnitQuaternion quat_integrate(const UnitQuaternion &q, const Vec3 &omega,
                              double Ts) {
  return unstack(omega_matrix(omega, Ts) * stack(q)).normalized();
}

Eigen::Vector4d quat_derivative(const UnitQuaternion &q, const Vec3 &omega) {
  Eigen::Vector4d d;
  d.head<3>() = 0.5 * (q.s * omega + q.v.cross(omega));
  d[3] = -0.5 * q.v.dot(omega);
  return d;
}

} // namespace cotrans
