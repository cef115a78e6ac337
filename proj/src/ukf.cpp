#include "cotrans/ukf.hpp"

#include "cotrans/errors.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace cotrans {

FullModel FullModel::from(const MavParams &p) {
  FullModel m;
  m.m = p.m;
  m.J = p.J;
  m.k_drag = p.k_drag;
  m.allocation = p.allocation;
  return m;
}

UkfConfig UkfConfig::standard(double Ts, double lambda, double w0) {
  UkfConfig c;
  c.Ts = Ts;
  c.lambda = lambda;
  constexpr int n = 16;
  c.w_m.assign(2 * n + 1, (1.0 - w0) / (2.0 * n));
  c.w_m[0] = w0;
  c.w_c = c.w_m;
  return c;
}

UkfNoise UkfNoise::defaults() {
  UkfNoise n;
  n.Q << Vec3::Constant(1e-9), Vec3::Constant(1e-6), Vec3::Constant(1e-9),
      Vec3::Constant(1e-6), Vec3::Constant(4e-3), 1e-6;
  n.R << Vec3::Constant(1e-6), Vec3::Constant(1e-4), Vec3::Constant(1e-6),
      Vec3::Constant(1e-4);
  return n;
}

Mat16 covariance_sqrt(const Mat16 &P) {
  Eigen::LLT<Mat16> llt(P);
  if (llt.info() == Eigen::Success)
    return llt.matrixL();

  const double scale = std::max(1.0, P.diagonal().cwiseAbs().maxCoeff());
  Eigen::LDLT<Mat16> ldlt(P);
  if (ldlt.info() == Eigen::Success) {
    const Vec16 d = ldlt.vectorD();
    if (d.minCoeff() >= -1e-12 * scale) {
      Mat16 L = ldlt.matrixL();
      const Mat16 S = ldlt.transpositionsP().transpose() *
                      (L * d.cwiseMax(0.0).cwiseSqrt().asDiagonal());
      return S;
    }
  }
  Eigen::LLT<Mat16> retry(P + 1e-9 * Mat16::Identity());
  if (retry.info() != Eigen::Success)
    throw CholeskyFailure("covariance is not positive semidefinite");
  return retry.matrixL();
}

std::vector<Vec16> ukf_sigma_points(const Vec16 &xi, const Mat16 &P,
                                    const UkfConfig &cfg) {
  constexpr int n = 16;
  const Mat16 S = covariance_sqrt((cfg.lambda + n) * P);
  std::vector<Vec16> pts(2 * n + 1, xi);
  for (int i = 0; i < n; ++i) {
    pts[1 + i] = xi + S.col(i);
    pts[1 + n + i] = xi - S.col(i);
  }
  return pts;
}

Mat3 rotation_from_vector(const Vec3 &v) {
  const double a = v.norm();
  if (a < 1e-12)
    return Mat3::Identity() + skew(v);
  return quat_to_rotmat(UnitQuaternion::from_axis_angle(v / a, a));
}

Mat16 ukf_reset_transform(const Vec3 &eps) {
  Mat16 T = Mat16::Identity();
  T.block<3, 3>(6, 6) = rotation_from_vector(0.5 * eps);
  return T;
}

Vec3 attitude_error(const UnitQuaternion &q_meas, const UnitQuaternion &q_ref,
                    const MrpConfig &cfg) {
  const UnitQuaternion dq =
      quat_multiply(q_meas, quat_inverse(q_ref)).canonical();
  return quat_to_mrp(dq, cfg).p;
}

UkfPoint ukf_propagate_point(const UkfPoint &x, const RotorSpeeds &n,
                             const FullModel &model, double Ts) {
  MavParams mp;
  mp.m = model.m;
  mp.J = model.J;
  mp.k_drag = model.k_drag;
  mp.allocation = model.allocation;
  const PropWrench w = allocate_wrench(n, mp);
  AgentState st{x.p, x.v, x.q, x.omega};
  UkfPoint out = x;
  out.p = x.p + Ts * x.v;
  out.v = x.v + Ts * translational_dynamics(st, w.F_prop, x.F, n, mp);
  out.q = quat_integrate(x.q, x.omega, Ts);
  out.omega = x.omega + Ts * rotational_dynamics(x.omega, w.M_prop,
                                                  Vec3(0, 0, x.Mz), model.J);
  return out;
}

namespace {

Mat16 symmetrize(const Mat16 &P) { return 0.5 * (P + P.transpose()); }

} // namespace

UkfState ukf_predict(const UkfState &s, const RotorSpeeds &n,
                     const UkfConfig &cfg, const Vec16 &Q, const FullModel &model) {
  const auto pts = ukf_sigma_points(s.xi, s.P, cfg);
  const std::size_t count = pts.size();

  std::vector<UkfPoint> prop(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vec16 &x = pts[i];
    UkfPoint pt;
    pt.p = x.segment<3>(0);
    pt.v = x.segment<3>(3);
    pt.q = quat_multiply(mrp_to_quat(Vec3(x.segment<3>(6)), cfg.mrp), s.q);
    pt.omega = x.segment<3>(9);
    pt.F = x.segment<3>(12);
    pt.Mz = x[15];
    prop[i] = ukf_propagate_point(pt, n, model, cfg.Ts);
  }

  UkfState out;
  out.q = prop[0].q.canonical();
  std::vector<Vec16> chi(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec16 &c = chi[i];
    c.segment<3>(0) = prop[i].p;
    c.segment<3>(3) = prop[i].v;
    c.segment<3>(6) = attitude_error(prop[i].q, out.q, cfg.mrp);
    c.segment<3>(9) = prop[i].omega;
    c.segment<3>(12) = prop[i].F;
    c[15] = prop[i].Mz;
  }

  Vec16 mean = Vec16::Zero();
  for (std::size_t i = 0; i < count; ++i)
    mean += cfg.w_m[i] * chi[i];
  Mat16 P = Mat16::Zero();
  for (std::size_t i = 0; i < count; ++i) {
    const Vec16 d = chi[i] - mean;
    P += cfg.w_c[i] * d * d.transpose();
  }
  P.diagonal() += Q;

  const Mat16 T = ukf_reset_transform(mean.segment<3>(6));
  out.xi = mean;
  out.P = symmetrize(T * P * T.transpose());
  return out;
}

UkfState ukf_update(const UkfState &s, const UkfMeasurement &z, const Vec12 &R,
                    const UkfConfig &cfg) {
  Vec12 y;
  y << z.p, z.v, attitude_error(z.q, s.q, cfg.mrp), z.omega;
  const Vec12 innov = y - s.xi.head<12>();

  const Eigen::Matrix<double, 12, 12> S =
      s.P.topLeftCorner<12, 12>() + Eigen::Matrix<double, 12, 12>(R.asDiagonal());
  const Eigen::Matrix<double, 16, 12> PHt = s.P.leftCols<12>();
  const Eigen::Matrix<double, 16, 12> K = S.ldlt().solve(PHt.transpose()).transpose();

  UkfState out;
  out.xi = s.xi + K * innov;
  Eigen::Matrix<double, 16, 16> IKH = Mat16::Identity();
  IKH.leftCols<12>() -= K;
  Mat16 P = IKH * s.P * IKH.transpose() +
            K * Eigen::Matrix<double, 12, 12>(R.asDiagonal()) * K.transpose();

  const Vec3 eps = out.xi.segment<3>(6);
  out.q = quat_multiply(mrp_to_quat(eps, cfg.mrp), s.q).canonical();
  const Mat16 T = ukf_reset_transform(eps);
  out.P = symmetrize(T * P * T.transpose());
  out.xi.segment<3>(6).setZero();
  return out;
}

UkfState ukf_initial_state(const Vec3 &p, const UnitQuaternion &q,
                           const Vec3 &F_ext) {
  UkfState s;
  s.xi.segment<3>(0) = p;
  s.xi.segment<3>(12) = F_ext;
  s.q = q.canonical();
  Vec16 d;
  d << Vec3::Constant(1e-6), Vec3::Constant(1e-4), Vec3::Constant(1e-6),
      Vec3::Constant(1e-4), Vec3::Constant(1e-2), 1e-4;
  s.P = d.asDiagonal();
  return s;
}

} // namespace cotrans
