#include "cotrans/ekf.hpp"
#include "cotrans/errors.hpp"
#include "cotrans/identification.hpp"
#include "cotrans/oracles.hpp"
#include "cotrans/ukf.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace cotrans;

namespace {

template <int N>
double min_eig(const Eigen::Matrix<double, N, N> &P) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>>(P).eigenvalues().minCoeff();
}

EkfInput hover_input(const ReducedModel &m) {
  EkfInput u;
  u.thrust = m.m * kGravity;
  return u;
}

RotorSpeeds hover_rotors(const MavParams &p) {
  return RotorSpeeds::Constant(6, std::sqrt(p.m * kGravity / (6 * p.rotors.thrust_coeff)));
}

Vec18 random_ekf_state(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec18 x;
  for (int i = 0; i < 18; ++i)
    x[i] = u(rng);
  x.segment<2>(6) *= 0.5;
  x[8] *= 3.0;
  x.segment<3>(12) *= 5.0;
  x.segment<3>(15) *= 0.1;
  return x;
}

Vec16 random_vec16(std::mt19937_64 &rng) {
  std::normal_distribution<double> n;
  Vec16 v;
  for (int i = 0; i < 16; ++i)
    v[i] = n(rng);
  return v;
}

Mat16 random_cov(std::mt19937_64 &rng) {
  Mat16 A;
  for (int j = 0; j < 16; ++j)
    A.col(j) = random_vec16(rng);
  return A * A.transpose() / 16.0 + 1e-3 * Mat16::Identity();
}

double step_time_within(const StepRecord &r, double band) {
  for (std::size_t k = r.y.size(); k-- > 0;)
    if (std::abs(r.y[k] - 1.0) > band)
      return k + 1 < r.t.size() ? r.t[k + 1] : r.t[k];
  return r.t.front();
}

} // namespace

TEST(EkfPredict, HoverMeanFixedAndCovarianceGrowsByQ) {
  const ReducedModel m;
  EkfState s = ekf_initial_state(Vec3(1, 2, 1.2), EulerAngles{});
  s.P.setZero();
  const Vec18 Q = EkfNoise::defaults().Q;
  const EkfState out = ekf_predict(s, hover_input(m), Q, 0.01, m);
  EXPECT_LT((out.x - s.x).norm(), 1e-15);
  EXPECT_LT((out.P - Mat18(Q.asDiagonal())).cwiseAbs().maxCoeff(), 1e-18);
}

TEST(EkfPredict, ExternalForceAcceleratesVelocity) {
  const ReducedModel m;
  const EkfState s = ekf_initial_state(Vec3::Zero(), EulerAngles{}, Vec3(2.0, 0, 0));
  const EkfState out = ekf_predict(s, hover_input(m), Vec18::Zero(), 0.01, m);
  EXPECT_NEAR(out.x[3], 0.01 * 2.0 / m.m, 1e-15);
  EXPECT_NEAR(out.force().x(), 2.0, 1e-15);
}

TEST(EkfPredict, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  const ReducedModel m;
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vec18 x = random_ekf_state(rng);
    EkfInput in{u(rng), u(rng), u(rng), 30.0 + 10.0 * u(rng)};
    Eigen::MatrixXd fd(18, 18);
    for (int j = 0; j < 18; ++j) {
      const double h = 1e-6;
      Vec18 xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      fd.col(j) = (ekf_process_rate(xp, in, m) - ekf_process_rate(xm, in, m)) / (2 * h);
    }
    worst = std::max(worst, jacobian_error(ekf_process_jacobian(x, in, m), fd));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(EkfUpdate, ConsistentMeasurementLeavesMean) {
  std::mt19937_64 rng(3);
  EkfState s = ekf_initial_state(Vec3(0.3, -0.2, 1.0), EulerAngles{0.05, -0.02, 0.4});
  s.x.segment<3>(3) = Vec3(0.1, 0.2, 0.0);
  Vec6 z;
  z << s.x.segment<3>(0), s.x.segment<3>(6);
  const EkfState out = ekf_update(s, z, EkfNoise::defaults().R);
  EXPECT_LT((out.x - s.x).norm(), 1e-15);
  EXPECT_LE(out.P.trace(), s.P.trace());
}

TEST(EkfUpdate, HugeNoiseIgnoresChannel) {
  EkfState s = ekf_initial_state(Vec3::Zero(), EulerAngles{});
  s.P(0, 3) = s.P(3, 0) = 5e-5;
  s.P(0, 12) = s.P(12, 0) = 1e-4;
  Vec6 R = EkfNoise::defaults().R;
  R[0] = 1e30;
  Vec6 z = Vec6::Zero();
  z[0] = 0.5;
  const EkfState out = ekf_update(s, z, R);
  EXPECT_LT((out.x - s.x).cwiseAbs().maxCoeff(), 1e-25);
  R[0] = 1e-6;
  EXPECT_GT(std::abs(ekf_update(s, z, R).x[12]), 1e-3);
}

TEST(EkfCovariance, StaysSymmetricPsd) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nz(0.0, 1e-3);
  const ReducedModel m;
  const EkfNoise noise = EkfNoise::defaults();
  EkfState s = ekf_initial_state(Vec3::Zero(), EulerAngles{});
  EkfInput u = hover_input(m);
  for (int k = 0; k < 2000; ++k) {
    u.roll_cmd = 0.1 * std::sin(0.01 * k);
    s = ekf_predict(s, u, noise.Q, 0.01, m);
    EXPECT_LT((s.P - s.P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    Vec6 z;
    z << s.x.segment<3>(0), s.x.segment<3>(6);
    for (int i = 0; i < 6; ++i)
      z[i] += nz(rng);
    s = ekf_update(s, z, noise.R);
    EXPECT_LT((s.P - s.P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    if (k % 100 == 0) {
      EXPECT_GT(min_eig<18>(s.P), -1e-9);
    }
  }
}

TEST(SigmaPoints, ZeroCovarianceCollapses) {
  const UkfConfig cfg = UkfConfig::standard();
  const Vec16 mean = Vec16::LinSpaced(0.0, 1.5);
  const auto pts = ukf_sigma_points(mean, Mat16::Zero(), cfg);
  ASSERT_EQ(pts.size(), 33u);
  for (const auto &p : pts)
    EXPECT_EQ(p, mean);
}

TEST(SigmaPoints, UnitCovarianceOffsets) {
  const UkfConfig cfg = UkfConfig::standard(0.01, 1.0);
  const auto pts = ukf_sigma_points(Vec16::Zero(), Mat16::Identity(), cfg);
  for (int i = 0; i < 16; ++i) {
    EXPECT_NEAR(pts[1 + i].norm(), std::sqrt(17.0), 1e-14);
    EXPECT_NEAR(pts[1 + i][i], std::sqrt(17.0), 1e-14);
    EXPECT_EQ(pts[17 + i], -pts[1 + i]);
  }
}

TEST(SigmaPoints, WeightsSumToOne) {
  for (double w0 : {0.0, 0.2}) {
    const UkfConfig c = UkfConfig::standard(0.01, 0.0, w0);
    double sm = 0.0, sc = 0.0;
    for (std::size_t i = 0; i < c.w_m.size(); ++i) {
      sm += c.w_m[i];
      sc += c.w_c[i];
    }
    EXPECT_NEAR(sm, 1.0, 1e-15);
    EXPECT_NEAR(sc, 1.0, 1e-15);
  }
}

TEST(SigmaPoints, UnscentedTransformIsExactForAffineMaps) {
  std::mt19937_64 rng(12);
  const UkfConfig cfg = UkfConfig::standard();
  for (int trial = 0; trial < 20; ++trial) {
    const Vec16 mean = random_vec16(rng);
    const Mat16 P = random_cov(rng);
    const Mat16 A = random_cov(rng) - 0.5 * Mat16::Identity();
    const Vec16 b = random_vec16(rng);
    const auto pts = ukf_sigma_points(mean, P, cfg);
    Vec16 ym = Vec16::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i)
      ym += cfg.w_m[i] * (A * pts[i] + b);
    Mat16 Py = Mat16::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec16 d = A * pts[i] + b - ym;
      Py += cfg.w_c[i] * d * d.transpose();
    }
    EXPECT_LT((ym - (A * mean + b)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((Py - A * P * A.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(CovarianceSqrt, HandlesSemidefiniteAndRejectsIndefinite) {
  Mat16 P = Mat16::Zero();
  P.diagonal().head<8>().setConstant(2.0);
  const Mat16 S = covariance_sqrt(P);
  EXPECT_LT((S * S.transpose() - P).cwiseAbs().maxCoeff(), 1e-12);
  Mat16 bad = Mat16::Identity();
  bad(3, 3) = -1.0;
  EXPECT_THROW(covariance_sqrt(bad), CholeskyFailure);
}

TEST(UkfPredict, HoverIsFixedPoint) {
  const MavParams mav;
  const FullModel model = FullModel::from(mav);
  const UkfConfig cfg = UkfConfig::standard();
  UkfState s = ukf_initial_state(Vec3(0, 0, 1.2), UnitQuaternion::identity());
  s.P *= 1e-6;
  const UkfState out = ukf_predict(s, hover_rotors(mav), cfg, Vec16::Zero(), model);
  EXPECT_LT((out.xi - s.xi).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(attitude_error(out.q, s.q, cfg.mrp).norm(), 1e-14);
}

TEST(UkfPredict, ResetTransformIdentityAtZero) {
  EXPECT_EQ(ukf_reset_transform(Vec3::Zero()), Mat16::Identity());
  const Mat16 T = ukf_reset_transform(Vec3(0.1, -0.2, 0.05));
  EXPECT_LT((T.transpose() * T - Mat16::Identity()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE((T.topLeftCorner<6, 6>().isIdentity(0.0)));
}

TEST(UkfPredict, SmallCovarianceMatchesLinearization) {
  const MavParams mav;
  const FullModel model = FullModel::from(mav);
  const UkfConfig cfg = UkfConfig::standard();
  RotorSpeeds n = hover_rotors(mav);
  n[1] += 3.0;
  n[4] -= 2.0;
  UkfState s = ukf_initial_state(Vec3(0, 0, 1.2),
                                 UnitQuaternion::from_axis_angle(Vec3(1, 0, 0.5), 0.1),
                                 Vec3(0.5, 0, 0));
  s.xi.segment<3>(3) = Vec3(0.4, -0.3, 0.1);
  s.xi.segment<3>(9) = Vec3(0.2, 0.1, -0.3);
  std::mt19937_64 rng(5);
  s.P = 1e-10 * random_cov(rng);

  auto propagate = [&](const Vec16 &x) {
    UkfPoint pt{x.segment<3>(0), x.segment<3>(3),
                quat_multiply(mrp_to_quat(Vec3(x.segment<3>(6)), cfg.mrp), s.q),
                x.segment<3>(9), x.segment<3>(12), x[15]};
    return ukf_propagate_point(pt, n, model, cfg.Ts);
  };
  const UkfPoint ref = propagate(s.xi);
  Mat16 F;
  for (int j = 0; j < 16; ++j) {
    const double h = 1e-6;
    Vec16 xp = s.xi, xm = s.xi;
    xp[j] += h;
    xm[j] -= h;
    auto flat = [&](const UkfPoint &p) {
      Vec16 c;
      c << p.p, p.v, attitude_error(p.q, ref.q, cfg.mrp), p.omega, p.F, p.Mz;
      return c;
    };
    F.col(j) = (flat(propagate(xp)) - flat(propagate(xm))) / (2 * h);
  }
  const UkfState out = ukf_predict(s, n, cfg, Vec16::Zero(), model);
  const Mat16 lin = F * s.P * F.transpose();
  const double big = lin.diagonal().maxCoeff();
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (std::abs(lin(i, j)) > 1e-2 * big) {
        EXPECT_NEAR(out.P(i, j) / lin(i, j), 1.0, 0.05) << i << "," << j;
      }
}

TEST(UkfUpdate, ConsistentMeasurementContracts) {
  const UkfConfig cfg = UkfConfig::standard();
  UkfState s = ukf_initial_state(Vec3(1, 0, 1.2), UnitQuaternion::from_axis_angle(Vec3::UnitZ(), 0.3));
  s.xi.segment<3>(3) = Vec3(0.2, 0, 0);
  const UkfMeasurement z{s.xi.segment<3>(0), s.xi.segment<3>(3), s.q, s.xi.segment<3>(9)};
  const UkfState out = ukf_update(s, z, UkfNoise::defaults().R, cfg);
  EXPECT_LT((out.xi - s.xi).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(attitude_error(out.q, s.q, cfg.mrp).norm(), 1e-15);
  EXPECT_LT(out.P.trace(), s.P.trace());
}

TEST(UkfUpdate, AttitudeOffsetMovesOnlyCoupledBlocks) {
  const UkfConfig cfg = UkfConfig::standard();
  UkfState s = ukf_initial_state(Vec3::Zero(), UnitQuaternion::identity());
  // Attitude error correlated with body rate and yaw torque only.
  s.P(8, 11) = s.P(11, 8) = 5e-7;
  s.P(8, 15) = s.P(15, 8) = 5e-7;
  s.P(6, 9) = s.P(9, 6) = 5e-7;
  UkfMeasurement z{Vec3::Zero(), Vec3::Zero(),
                   UnitQuaternion::from_axis_angle(Vec3(1, 0, 1), 0.002), Vec3::Zero()};
  const UkfState out = ukf_update(s, z, UkfNoise::defaults().R, cfg);
  EXPECT_EQ(out.xi.head<6>(), (Vec6::Zero()));
  EXPECT_EQ(out.xi.segment<3>(12), Vec3::Zero());
  EXPECT_GT(std::abs(out.xi[9]), 1e-6);
  EXPECT_GT(std::abs(out.xi[11]), 1e-6);
  EXPECT_GT(std::abs(out.xi[15]), 1e-6);
  EXPECT_GT(out.q.angle(), 1e-4);
  EXPECT_EQ(out.xi.segment<3>(6), Vec3::Zero());
}

TEST(UkfUpdate, CommittedAttitudeReextractsToZero) {
  const UkfConfig cfg = UkfConfig::standard();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const UnitQuaternion q = UnitQuaternion::from_axis_angle(Vec3(u(rng), u(rng), u(rng)), 2.0 * u(rng));
    const Vec3 eps(0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng));
    const UnitQuaternion committed = quat_multiply(mrp_to_quat(eps, cfg.mrp), q);
    EXPECT_LT((attitude_error(committed, q, cfg.mrp) - eps).norm(), 1e-13);
    EXPECT_LT(attitude_error(committed, committed, cfg.mrp).norm(), 1e-15);
  }
}

TEST(UkfCovariance, StaysSymmetricPsd) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nz(0.0, 1e-3);
  const MavParams mav;
  const FullModel model = FullModel::from(mav);
  const UkfConfig cfg = UkfConfig::standard();
  const UkfNoise noise = UkfNoise::defaults();
  UkfState s = ukf_initial_state(Vec3::Zero(), UnitQuaternion::identity());
  RotorSpeeds n = hover_rotors(mav);
  for (int k = 0; k < 1000; ++k) {
    n[k % 6] += 0.5 * std::sin(0.05 * k);
    s = ukf_predict(s, n, cfg, noise.Q, model);
    EXPECT_LT((s.P - s.P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    UkfMeasurement z{s.xi.segment<3>(0), s.xi.segment<3>(3), s.q, s.xi.segment<3>(9)};
    z.p += Vec3(nz(rng), nz(rng), nz(rng));
    z.omega += Vec3(nz(rng), nz(rng), nz(rng));
    s = ukf_update(s, z, noise.R, cfg);
    EXPECT_LT((s.P - s.P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    if (k % 50 == 0) {
      EXPECT_GT(min_eig<16>(s.P), -1e-9);
    }
  }
}

TEST(NominalEstimator, LagValues) {
  EXPECT_EQ(nominal_estimator_model(Vec3(1, 2, 3), Vec3(1, 2, 3), 0.2), Vec3::Zero());
  Vec3 F = Vec3::Zero();
  for (int k = 0; k < 20; ++k)
    F = nominal_estimator_step(F, Vec3(1, 0, 0), 0.2, 0.01);
  EXPECT_NEAR(F.x(), 1.0 - std::exp(-1.0), 1e-12);
  for (int k = 0; k < 5000; ++k)
    F = nominal_estimator_step(F, Vec3(1, 0, 0), 0.2, 0.01);
  EXPECT_NEAR(F.x(), 1.0, 1e-12);
}

class ForceStep : public ::testing::TestWithParam<EstimatorKind> {};

TEST_P(ForceStep, ConvergesToAppliedForce) {
  const MavParams mav;
  const StepRecord r = estimator_force_step(mav, GetParam(), 1.0, 6.0);
  double t0 = -1.0;
  for (std::size_t k = 0; k < r.u.size(); ++k)
    if (r.u[k] > 0.5) {
      t0 = r.t[k];
      break;
    }
  ASSERT_GE(t0, 0.0);
  EXPECT_LE(step_time_within(r, 0.05) - t0, 1.0);
  const double tau = fit_time_constant(r.t, r.y, t0, r.y.back());
  EXPECT_GE(tau, 0.1);
  EXPECT_LE(tau, 0.4);
  // Unbiased: within 1% after ten estimator time constants.
  for (std::size_t k = 0; k < r.t.size(); ++k)
    if (r.t[k] >= t0 + 10 * mav.tau_est) {
      EXPECT_NEAR(r.y[k], 1.0, 0.01) << "t " << r.t[k];
    }
}

INSTANTIATE_TEST_SUITE_P(Estimators, ForceStep,
                         ::testing::Values(EstimatorKind::Ekf, EstimatorKind::Ukf,
                                           EstimatorKind::NominalLag),
                         [](const auto &info) {
                           return std::string(info.param == EstimatorKind::Ekf   ? "Ekf"
                                              : info.param == EstimatorKind::Ukf ? "Ukf"
                                                                                 : "Lag");
                         });

TEST(FitTimeConstant, RecoversExactLag) {
  std::vector<double> t, y;
  for (int k = 0; k <= 300; ++k) {
    t.push_back(0.01 * k);
    y.push_back(t.back() < 0.5 ? 0.0 : 2.0 * (1.0 - std::exp(-(t.back() - 0.5) / 0.2)));
  }
  EXPECT_NEAR(fit_time_constant(t, y, 0.5, 2.0), 0.2, 1e-6);
}
