#include "cotrans/oracles.hpp"

#include "cotrans/admittance.hpp"
#include "cotrans/analysis_model.hpp"
#include "cotrans/ekf.hpp"
#include "cotrans/margins.hpp"
#include "cotrans/payload.hpp"
#include "cotrans/ukf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

namespace cotrans {

bool OracleReport::passed() const { return failures() == 0; }

int OracleReport::failures() const {
  return static_cast<int>(std::count_if(results.begin(), results.end(),
                                        [](const OracleResult &r) { return !r.passed; }));
}

std::string OracleReport::text() const {
  std::ostringstream os;
  char buf[256];
  for (const auto &r : results) {
    std::snprintf(buf, sizeof buf, "%-4s %-26s error=%.3e tol=%.1e", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.error, r.tolerance);
    os << buf;
    if (!r.detail.empty())
      os << "  " << r.detail;
    os << '\n';
  }
  std::snprintf(buf, sizeof buf, "max jacobian error %.3e\n", max_jacobian_error);
  os << buf;
  return os.str();
}

double jacobian_error(const Eigen::MatrixXd &J, const Eigen::MatrixXd &reference) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < J.cols(); ++j) {
    const double scale = std::max(1.0, reference.col(j).norm());
    worst = std::max(worst, (J.col(j) - reference.col(j)).norm() / scale);
  }
  return worst;
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 uniform3(Rng &rng, double lim) {
  return {uniform(rng, -lim, lim), uniform(rng, -lim, lim), uniform(rng, -lim, lim)};
}

UnitQuaternion random_rotation(Rng &rng, double max_angle) {
  Vec3 axis = uniform3(rng, 1.0);
  while (axis.norm() < 1e-3)
    axis = uniform3(rng, 1.0);
  return UnitQuaternion::from_axis_angle(axis, uniform(rng, 0.0, max_angle));
}

double quat_distance(const UnitQuaternion &a, const UnitQuaternion &b) {
  const Eigen::Vector4d x = stack(a), y = stack(b);
  return std::min((x - y).cwiseAbs().maxCoeff(), (x + y).cwiseAbs().maxCoeff());
}

OracleResult make(const std::string &name, double error, double tol,
                  std::string detail = {}) {
  return {name, error, tol, std::isfinite(error) && error < tol, std::move(detail)};
}

template <class F, class V> V rk4(const F &f, const V &x, double h) {
  const V k1 = f(x);
  const V k2 = f(V(x + 0.5 * h * k1));
  const V k3 = f(V(x + 0.5 * h * k2));
  const V k4 = f(V(x + h * k3));
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

OracleResult mrp_roundtrip(Rng &rng, int count) {
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const UnitQuaternion q = random_rotation(rng, M_PI - 1e-3);
    worst = std::max(worst, quat_distance(mrp_to_quat(quat_to_mrp(q)), q));
  }
  return make("mrp-roundtrip", worst, 1e-12);
}

OracleResult quaternion_integration(Rng &rng) {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const UnitQuaternion q0 = random_rotation(rng, M_PI);
    const Vec3 w = uniform3(rng, 2.0);
    const double Ts = 0.01;
    Eigen::Vector4d x = stack(q0);
    const int sub = 100;
    auto f = [&](const Eigen::Vector4d &s) { return quat_derivative(unstack(s), w); };
    for (int k = 0; k < sub; ++k)
      x = rk4(f, x, Ts / sub);
    worst = std::max(worst, quat_distance(quat_integrate(q0, w, Ts), unstack(x)));
  }
  return make("quaternion-integration", worst, 1e-8);
}

OracleResult ekf_jacobian(Rng &rng, int states) {
  const ReducedModel m = ReducedModel::from(MavParams());
  double worst = 0.0;
  for (int i = 0; i < states; ++i) {
    Vec18 x;
    x << uniform3(rng, 5.0), uniform3(rng, 2.0), uniform(rng, -0.5, 0.5),
        uniform(rng, -0.5, 0.5), uniform(rng, -3.0, 3.0), uniform3(rng, 1.0),
        uniform3(rng, 5.0), uniform3(rng, 0.5);
    EkfInput u;
    u.roll_cmd = uniform(rng, -0.3, 0.3);
    u.pitch_cmd = uniform(rng, -0.3, 0.3);
    // Keep the yaw error away from the wrap point.
    u.yaw_cmd = x[8] + uniform(rng, -2.0, 2.0);
    u.thrust = uniform(rng, 20.0, 50.0);
    Mat18 fd;
    for (int j = 0; j < 18; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      Vec18 xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      fd.col(j) = (ekf_process_rate(xp, u, m) - ekf_process_rate(xm, u, m)) / (2.0 * h);
    }
    worst = std::max(worst, jacobian_error(ekf_process_jacobian(x, u, m), fd));
  }
  return make("ekf-jacobian", worst, 1e-4, std::to_string(states) + " states");
}

OracleResult linearize_fd(Rng &rng, int states) {
  const AnalysisModel model(AnalysisConfig::polygon(2, 8.0, 6.0));
  const VectorXd rest = model.rest_state();
  double worst = 0.0;
  for (int i = 0; i < states; ++i) {
    VectorXd x = rest;
    x[0] += uniform(rng, -0.2, 0.2);
    x.segment<3>(1) += uniform3(rng, 0.2);
    x.segment<3>(4) += uniform3(rng, 0.2);
    x.segment<3>(7) += uniform3(rng, 0.3);
    for (int a = 0; a < model.n(); ++a) {
      const int o = model.agent_offset(a);
      x.segment<2>(o) += Eigen::Vector2d(uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1));
      x.segment<3>(o + 2) += uniform3(rng, 2.0);
    }
    for (int k = 0; k < model.n() - 1; ++k) {
      const int o = model.slave_offset(k);
      x.segment<4>(o) += Eigen::Vector4d(uniform(rng, -0.1, 0.1), uniform(rng, -0.2, 0.2),
                                         uniform(rng, -0.2, 0.2), uniform(rng, -0.1, 0.1));
      x.segment<3>(o + 4) += uniform3(rng, 2.0);
    }
    const VectorXd w = Eigen::Vector2d(uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2));
    const LinearSystem ad = linearize_at(model, x, w).sys;
    const LinearSystem fd = finite_difference_linearization(model, x, w);
    Eigen::MatrixXd J(ad.nx() + ad.ny(), ad.nx() + ad.nu()), R(J.rows(), J.cols());
    J << ad.A, ad.B, ad.C, ad.D;
    R << fd.A, fd.B, fd.C, fd.D;
    worst = std::max(worst, jacobian_error(J, R));
  }
  return make("linearize-jacobian", worst, 1e-4, std::to_string(states) + " states");
}

OracleResult linearize_closed_form() {
  double worst = 0.0;
  for (int n : {2, 3, 5}) {
    const AnalysisModel model(AnalysisConfig::polygon(n, 8.0, 6.0));
    const LinearSystem num = linearize(OperatingPoint::Rest, model).sys;
    const LinearSystem ana = build_closed_loop(model);
    const double scale = std::max(1.0, ana.A.cwiseAbs().maxCoeff());
    worst = std::max(worst, (num.A - ana.A).cwiseAbs().maxCoeff() / scale);
    worst = std::max(worst, (num.B - ana.B).cwiseAbs().maxCoeff() /
                                std::max(1.0, ana.B.cwiseAbs().maxCoeff()));
  }
  return make("linearize-closed-form", worst, 1e-6, "n = 2, 3, 5 at rest");
}

OracleResult ut_affine(Rng &rng) {
  const UkfConfig cfg = UkfConfig::standard();
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vec16 mean;
    for (int i = 0; i < 16; ++i)
      mean[i] = uniform(rng, -2.0, 2.0);
    Mat16 L = Mat16::Zero();
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j <= i; ++j)
        L(i, j) = i == j ? uniform(rng, 0.1, 1.0) : uniform(rng, -0.3, 0.3);
    const Mat16 P = L * L.transpose();
    Mat16 A;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        A(i, j) = uniform(rng, -1.0, 1.0);
    Vec16 b;
    for (int i = 0; i < 16; ++i)
      b[i] = uniform(rng, -1.0, 1.0);
    const auto pts = ukf_sigma_points(mean, P, cfg);
    Vec16 m = Vec16::Zero();
    std::vector<Vec16> y;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      y.push_back(A * pts[k] + b);
      m += cfg.w_m[k] * y.back();
    }
    Mat16 S = Mat16::Zero();
    for (std::size_t k = 0; k < pts.size(); ++k)
      S += cfg.w_c[k] * (y[k] - m) * (y[k] - m).transpose();
    const Vec16 m_ref = A * mean + b;
    const Mat16 S_ref = A * P * A.transpose();
    worst = std::max(worst, (m - m_ref).cwiseAbs().maxCoeff() /
                                std::max(1.0, m_ref.cwiseAbs().maxCoeff()));
    worst = std::max(worst, (S - S_ref).cwiseAbs().maxCoeff() /
                                std::max(1.0, S_ref.cwiseAbs().maxCoeff()));
  }
  return make("ut-affine-exactness", worst, 1e-10);
}

OracleResult point_mass_inertia(Rng &rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    PayloadParams p;
    p.m_p = uniform(rng, 0.5, 3.0);
    p.J_p = Vec3(uniform(rng, 0.05, 0.5), uniform(rng, 0.05, 0.5), uniform(rng, 0.05, 0.5));
    std::vector<double> masses;
    for (int i = 0; i < n; ++i) {
      p.attachments.push_back(uniform3(rng, 1.5));
      p.R_PB.push_back(Mat3::Identity());
      masses.push_back(uniform(rng, 1.0, 5.0));
    }
    // Reference: explicit integral over point masses, -m [r]x [r]x.
    double m_sys = p.m_p;
    Mat3 J = p.J_p.asDiagonal();
    for (int i = 0; i < n; ++i) {
      const Vec3 &r = p.attachments[i];
      m_sys += masses[i];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double dot = a == b ? r.squaredNorm() : 0.0;
          J(a, b) += masses[i] * (dot - r[a] * r[b]);
        }
    }
    const SystemInertia s = system_mass_inertia(p, masses);
    worst = std::max(worst, std::abs(s.m_sys - m_sys) / m_sys);
    worst = std::max(worst, (s.J_sys - J).cwiseAbs().maxCoeff() / J.cwiseAbs().maxCoeff());
  }
  return make("point-mass-inertia", worst, 1e-12);
}

using Vec13 = Eigen::Matrix<double, 13, 1>;

// Payload with no agents attached, driven only by gravity.
Vec13 free_body_rate(const Vec13 &x, const SystemInertia &in, const PayloadParams &p) {
  SystemState s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.q = unstack(x.segment<4>(6));
  s.omega = x.segment<3>(10);
  const PayloadAccel a = payload_dynamics(s, Vec3::Zero(), Vec3::Zero(), in, p);
  Vec13 d;
  d << s.v, a.v_dot, quat_derivative(s.q, s.omega), a.omega_dot;
  return d;
}

OracleResult payload_free_fall() {
  PayloadParams p;
  SystemInertia in{2.0, Vec3(0.3, 0.5, 0.9).asDiagonal()};
  Vec13 x = Vec13::Zero();
  const Vec3 p0(0.3, -0.2, 5.0), v0(0.5, 0.1, 2.0);
  x.segment<3>(0) = p0;
  x.segment<3>(3) = v0;
  x[9] = 1.0;
  const double h = 0.01, T = 1.0;
  auto f = [&](const Vec13 &s) { return free_body_rate(s, in, p); };
  for (int k = 0; k < std::lround(T / h); ++k)
    x = rk4(f, x, h);
  const Vec3 p_ref = p0 + v0 * T - 0.5 * gravity_vector() * T * T;
  const Vec3 v_ref = v0 - gravity_vector() * T;
  const double err = std::max((x.segment<3>(0) - p_ref).norm(), (x.segment<3>(3) - v_ref).norm());
  return make("payload-free-fall", err, 1e-9);
}

OracleResult rigid_body_momentum() {
  PayloadParams p;
  SystemInertia in{2.0, Vec3(0.3, 0.5, 0.9).asDiagonal()};
  Vec13 x = Vec13::Zero();
  x[9] = 1.0;
  x.segment<3>(10) = Vec3(0.4, -0.2, 1.0);
  auto momentum = [&](const Vec13 &s) {
    return Vec3(quat_to_rotmat(unstack(s.segment<4>(6))) * in.J_sys * s.segment<3>(10));
  };
  const Vec3 L0 = momentum(x);
  auto f = [&](const Vec13 &s) { return free_body_rate(s, in, p); };
  for (int k = 0; k < 2000; ++k) {
    x = rk4(f, x, 1e-3);
    x.segment<4>(6).normalize();
  }
  return make("rigid-body-momentum", (momentum(x) - L0).norm() / L0.norm(), 1e-8,
              "torque-free body, 2 s");
}

OracleResult attitude_step() {
  const MavParams mav;
  const double wn = mav.omega_n[0], cmd = 0.1, h = 1e-3;
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  auto f = [&](const Eigen::Vector2d &s) {
    return Eigen::Vector2d(s[1], reduced_attitude_dynamics(s[0], s[1], cmd, 0.0, mav, 0));
  };
  double worst = 0.0;
  for (int k = 1; k <= 2000; ++k) {
    x = rk4(f, x, h);
    const double t = k * h;
    const double ref = cmd * (1.0 - (1.0 + wn * t) * std::exp(-wn * t));
    worst = std::max(worst, std::abs(x[0] - ref));
  }
  return make("attitude-step", worst, 1e-8, "critically damped response");
}

OracleResult admittance_response() {
  AdmittanceParams params = AdmittanceParams::horizontal(8.0, 6.0);
  AdmittanceState st;
  const Vec3 F(6.0, -3.0, 0.0);
  const double Ts = 0.01;
  double worst = 0.0;
  for (int k = 1; k <= 1000; ++k) {
    st = admittance_step(st, F, params, Ts);
    const double t = k * Ts;
    for (int j = 0; j < 2; ++j) {
      const double v = F[j] / params.C[j] * (1.0 - std::exp(-params.C[j] * t / params.M[j]));
      worst = std::max(worst, std::abs(st.Lr_dot[j] - v));
    }
  }
  return make("admittance-response", worst, 1e-9);
}

OracleResult random_delta_hurwitz(int samples, std::uint64_t seed) {
  const AnalysisConfig base = AnalysisConfig::polygon(2, 8.0, 6.0);
  const MarginConfig cfg = default_margin_config().coarse();
  const MonteCarloReport r = random_delta_check(base, 8.0, 6.0, cfg, samples, seed);
  const double missed = static_cast<double>(r.samples - r.hurwitz);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d/%d Hurwitz, worst abscissa %.3g", r.hurwitz, r.samples,
                r.worst_abscissa);
  OracleResult out = make("random-delta-hurwitz", missed, 0.5, buf);
  out.passed = out.passed && r.samples > 0;
  return out;
}

} // namespace

OracleReport oracle_suite(const OracleOptions &opts) {
  Rng rng(opts.seed);
  OracleReport rep;
  auto add = [&](OracleResult r) { rep.results.push_back(std::move(r)); };
  auto guarded = [&](const std::string &name, const std::function<OracleResult()> &f) {
    try {
      add(f());
    } catch (const std::exception &e) {
      add({name, INFINITY, 0.0, false, std::string("threw: ") + e.what()});
    }
  };
  guarded("mrp-roundtrip", [&] { return mrp_roundtrip(rng, opts.roundtrips); });
  guarded("quaternion-integration", [&] { return quaternion_integration(rng); });
  guarded("ekf-jacobian", [&] { return ekf_jacobian(rng, opts.jacobian_states); });
  guarded("linearize-jacobian", [&] { return linearize_fd(rng, opts.jacobian_states); });
  guarded("linearize-closed-form", [&] { return linearize_closed_form(); });
  guarded("ut-affine-exactness", [&] { return ut_affine(rng); });
  guarded("point-mass-inertia", [&] { return point_mass_inertia(rng); });
  guarded("payload-free-fall", [&] { return payload_free_fall(); });
  guarded("rigid-body-momentum", [&] { return rigid_body_momentum(); });
  guarded("attitude-step", [&] { return attitude_step(); });
  guarded("admittance-response", [&] { return admittance_response(); });
  guarded("random-delta-hurwitz",
          [&] { return random_delta_hurwitz(opts.delta_samples, opts.seed); });
  for (const auto &r : rep.results)
    if (r.name == "ekf-jacobian" || r.name == "linearize-jacobian")
      rep.max_jacobian_error = std::max(rep.max_jacobian_error, r.error);
  return rep;
}

} // namespace cotrans
