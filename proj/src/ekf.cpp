#include "cotrans/ekf.hpp"
#include "cotrans/mutation.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

namespace cotrans {

ReducedModel ReducedModel::from(const MavParams &p) {
  ReducedModel m;
  m.m = p.m;
  m.K_drag = p.K_drag;
  m.omega_n = p.omega_n;
  m.xi = p.xi;
  m.k_att = p.k_att;
  m.J = p.J;
  return m;
}

EkfNoise EkfNoise::defaults() {
  EkfNoise n;
  n.Q << Vec3::Constant(1e-9), Vec3::Constant(1e-6), Vec3::Constant(1e-9),
      Vec3::Constant(1e-6), Vec3::Constant(4e-3), Vec3::Constant(1e-6);
  n.R << Vec3::Constant(1e-6), Vec3::Constant(1e-6);
  return n;
}

namespace {

double wrap(double a) {
  return std::remainder(a, 2.0 * std::numbers::pi);
}

// Partial derivatives of Rz(yaw) Ry(pitch) Rx(roll) with respect to each angle.
void euler_rotmat_partials(const Vec3 &eta, Mat3 out[3]) {
  const double cr = std::cos(eta[0]), sr = std::sin(eta[0]);
  const double cp = std::cos(eta[1]), sp = std::sin(eta[1]);
  const double cy = std::cos(eta[2]), sy = std::sin(eta[2]);
  Mat3 Rx, Ry, Rz, dRx, dRy, dRz;
  Rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
  Ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
  Rz << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
  dRx << 0, 0, 0, 0, -sr, -cr, 0, cr, -sr;
  dRy << -sp, 0, cp, 0, 0, 0, -cp, 0, -sp;
  dRz << -sy, -cy, 0, cy, -sy, 0, 0, 0, 0;
  out[0] = Rz * Ry * dRx;
  out[1] = Rz * dRy * Rx;
  out[2] = dRz * Ry * Rx;
}

// Partial derivatives of W(eta) * omega with respect to roll and pitch.
Mat3 euler_rate_partials(const Vec3 &eta, const Vec3 &w) {
  const double cr = std::cos(eta[0]), sr = std::sin(eta[0]);
  const double cp = std::cos(eta[1]), sp = std::sin(eta[1]);
  const double tp = sp / cp, sec2 = 1.0 / (cp * cp);
  Mat3 D = Mat3::Zero();
  D(0, 0) = cr * tp * w[1] - sr * tp * w[2];
  D(0, 1) = sec2 * (sr * w[1] + cr * w[2]);
  D(1, 0) = -sr * w[1] - cr * w[2];
  D(2, 0) = (cr * w[1] - sr * w[2]) / cp;
  D(2, 1) = (sr * w[1] + cr * w[2]) * sp * sec2;
  return D;
}

} // namespace

Vec18 ekf_process_rate(const Vec18 &x, const EkfInput &u, const ReducedModel &m) {
  const Vec3 v = x.segment<3>(3);
  const Vec3 eta = x.segment<3>(6);
  const Vec3 w = x.segment<3>(9);
  const Vec3 F = x.segment<3>(12);
  const Vec3 M = x.segment<3>(15);
  const EulerAngles e = EulerAngles::from_vec(eta);
  const Mat3 R = euler_to_rotmat(e);
  const Vec3 cmd(u.roll_cmd, u.pitch_cmd, u.yaw_cmd);

  Vec18 d = Vec18::Zero();
  d.segment<3>(0) = v;
  const double drag = mutation_sign(Mutation::EkfDrag);
  d.segment<3>(3) = R * (Vec3(0, 0, u.thrust) -
                         drag * m.K_drag.cwiseProduct(R.transpose() * v)) / m.m -
                    gravity_vector() + F / m.m;
  d.segment<3>(6) = euler_rate_matrix(e) * w;
  for (int k = 0; k < 3; ++k) {
    double err = m.k_att[k] * cmd[k] - eta[k];
    if (k == 2)
      err = wrap(err);
    d[9 + k] = m.omega_n[k] * m.omega_n[k] * err -
               2.0 * m.xi[k] * m.omega_n[k] * w[k] + M[k] / m.J[k];
  }
  return d;
}

Mat18 ekf_process_jacobian(const Vec18 &x, const EkfInput &u,
                           const ReducedModel &m) {
  const Vec3 v = x.segment<3>(3);
  const Vec3 eta = x.segment<3>(6);
  const Vec3 w = x.segment<3>(9);
  const EulerAngles e = EulerAngles::from_vec(eta);
  const Mat3 R = euler_to_rotmat(e);
  const Mat3 Kd = m.K_drag.asDiagonal();
  Mat3 dR[3];
  euler_rotmat_partials(eta, dR);

  Mat18 A = Mat18::Zero();
  A.block<3, 3>(0, 3) = Mat3::Identity();
  A.block<3, 3>(3, 3) = -R * Kd * R.transpose() / m.m;
  const Vec3 thrust(0, 0, u.thrust);
  for (int k = 0; k < 3; ++k) {
    A.block<3, 1>(3, 6 + k) =
        (dR[k] * (thrust - Kd * R.transpose() * v) -
         R * Kd * dR[k].transpose() * v) / m.m;
  }
  A.block<3, 3>(3, 12) = Mat3::Identity() / m.m;
  A.block<3, 3>(6, 6) = euler_rate_partials(eta, w);
  A.block<3, 3>(6, 9) = euler_rate_matrix(e);
  for (int k = 0; k < 3; ++k) {
    const double wn = m.omega_n[k];
    A(9 + k, 6 + k) = -wn * wn;
    A(9 + k, 9 + k) = -2.0 * m.xi[k] * wn;
    A(9 + k, 15 + k) = 1.0 / m.J[k];
  }
  return A;
}

Vec18 ekf_process_map(const Vec18 &x, const EkfInput &u, const ReducedModel &m,
                      double Ts) {
  return x + Ts * ekf_process_rate(x, u, m);
}

Mat18 ekf_transition_jacobian(const Vec18 &x, const EkfInput &u,
                              const ReducedModel &m, double Ts) {
  return Mat18::Identity() + Ts * ekf_process_jacobian(x, u, m);
}

EkfState ekf_predict(const EkfState &s, const EkfInput &u, const Vec18 &Q,
                     double Ts, const ReducedModel &m) {
  const Mat18 F = ekf_transition_jacobian(s.x, u, m, Ts);
  EkfState out;
  out.x = ekf_process_map(s.x, u, m, Ts);
  out.x[8] = wrap(out.x[8]);
  out.P = F * s.P * F.transpose();
  out.P.diagonal() += Q;
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  return out;
}

EkfState ekf_update(const EkfState &s, const Vec6 &z, const Vec6 &R) {
  Eigen::Matrix<double, 6, 18> H = Eigen::Matrix<double, 6, 18>::Zero();
  H.block<3, 3>(0, 0) = Mat3::Identity();
  H.block<3, 3>(3, 6) = Mat3::Identity();
  Vec6 innov = z - H * s.x;
  innov[5] = wrap(innov[5]);
  const Eigen::Matrix<double, 6, 6> S =
      H * s.P * H.transpose() + Eigen::Matrix<double, 6, 6>(R.asDiagonal());
  const Eigen::Matrix<double, 18, 6> K =
      S.ldlt().solve(H * s.P.transpose()).transpose();
  EkfState out;
  out.x = s.x + K * innov;
  out.x[8] = wrap(out.x[8]);
  const Mat18 IKH = Mat18::Identity() - K * H;
  out.P = IKH * s.P * IKH.transpose() +
          K * Eigen::Matrix<double, 6, 6>(R.asDiagonal()) * K.transpose();
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  return out;
}

EkfState ekf_initial_state(const Vec3 &p, const EulerAngles &eta, const Vec3 &F_ext) {
  EkfState s;
  s.x.segment<3>(0) = p;
  s.x.segment<3>(6) = eta.vec();
  s.x.segment<3>(12) = F_ext;
  Vec18 d;
  d << Vec3::Constant(1e-6), Vec3::Constant(1e-4), Vec3::Constant(1e-6),
      Vec3::Constant(1e-4), Vec3::Constant(1e-2), Vec3::Constant(1e-4);
  s.P = d.asDiagonal();
  return s;
}

Vec3 nominal_estimator_model(const Vec3 &F_hat, const Vec3 &F_true, double tau_est) {
  return (F_true - F_hat) / tau_est;
}

Vec3 nominal_estimator_step(const Vec3 &F_hat, const Vec3 &F_true, double tau_est,
                            double Ts) {
  const double a = std::exp(-Ts / tau_est);
  return a * F_hat + (1.0 - a) * F_true;
}

} // namespace cotrans
