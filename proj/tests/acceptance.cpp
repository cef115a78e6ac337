// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cotrans/admittance.hpp"
#include "cotrans/analysis_model.hpp"
#include "cotrans/attitude.hpp"
#include "cotrans/ekf.hpp"
#include "cotrans/identification.hpp"
#include "cotrans/margins.hpp"
#include "cotrans/oracles.hpp"
#include "cotrans/simulation.hpp"
#include "cotrans/ukf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace cotrans;

namespace {

// Pinned tolerances.
constexpr double kMrpTol = 1e-12;
constexpr double kIntegrateTol = 1e-8;
constexpr double kC1Runtime = 5.0;
constexpr double kEstBand = 0.05;
constexpr double kEstSettle = 1.0;
constexpr double kTauLo = 0.1, kTauHi = 0.4;
constexpr double kC2Runtime = 30.0;
constexpr double kAsymTol = 1e-10;
constexpr double kEigTol = -1e-9;
constexpr double kUtTol = 1e-10;
constexpr double kAdmTol = 0.01;
constexpr double kFsmTick = 0.01;
constexpr double kForceSettled = 0.1;
constexpr double kForceWindow = 20.0;
constexpr double kBadMargin = 0.5;
constexpr double kC6Runtime = 60.0;
constexpr int kSamplesPerCount = 10;
constexpr double kSweepRuntime = 600.0;
constexpr double kJacTol = 1e-4;
constexpr int kJacStates = 100;
constexpr double kMinOrder = 3.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int g_failures = 0;

void report(int id, const char *name, bool pass, const std::string &detail) {
  std::printf("C%-2d %s %-28s %s\n", id, pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass)
    ++g_failures;
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Scalar-last Hamilton product, written out independently of the library.
Eigen::Vector4d hamilton(const Eigen::Vector4d &a, const Eigen::Vector4d &b) {
  const Vec3 va = a.head<3>(), vb = b.head<3>();
  Eigen::Vector4d r;
  r.head<3>() = a[3] * vb + b[3] * va + va.cross(vb);
  r[3] = a[3] * b[3] - va.dot(vb);
  return r;
}

Eigen::Vector4d rk4_quat(Eigen::Vector4d q, const Vec3 &w, double T, int steps) {
  const Eigen::Vector4d wq(w[0], w[1], w[2], 0.0);
  auto f = [&](const Eigen::Vector4d &x) { return 0.5 * hamilton(x, wq); };
  const double h = T / steps;
  for (int k = 0; k < steps; ++k) {
    const auto k1 = f(q), k2 = f(q + 0.5 * h * k1), k3 = f(q + 0.5 * h * k2),
               k4 = f(q + h * k3);
    q += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return q;
}

double quat_gap(const UnitQuaternion &a, const UnitQuaternion &b) {
  const Eigen::Vector4d x = stack(a), y = stack(b);
  return std::min((x - y).cwiseAbs().maxCoeff(), (x + y).cwiseAbs().maxCoeff());
}

void criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ang(0.0, M_PI - 1e-3);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    Vec3 axis(u(rng), u(rng), u(rng));
    if (axis.norm() < 1e-6)
      axis = Vec3::UnitX();
    const double a = ang(rng);
    const UnitQuaternion q(std::sin(a / 2) * axis.normalized(), std::cos(a / 2));
    worst = std::max(worst, quat_gap(q, mrp_to_quat(quat_to_mrp(q))));
  }
  double worst_int = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector4d r = Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)).normalized();
    const UnitQuaternion q0 = unstack(r);
    const Vec3 w(2 * u(rng), 2 * u(rng), 2 * u(rng));
    const double Ts = 0.01;
    const Eigen::Vector4d ref = rk4_quat(stack(q0), w, Ts, 200);
    worst_int = std::max(worst_int, quat_gap(quat_integrate(q0, w, Ts), unstack(ref)));
  }
  const double rt = seconds_since(t0);
  report(1, "attitude-math",
         worst < kMrpTol && worst_int < kIntegrateTol && rt < kC1Runtime,
         fmt("mrp round trip %.2e (tol %.0e), integration %.2e (tol %.0e), %.2f s", worst,
             kMrpTol, worst_int, kIntegrateTol, rt));
}

void criterion_2() {
  const auto t0 = Clock::now();
  const MavParams mav;
  bool pass = true;
  std::string detail;
  for (EstimatorKind k : {EstimatorKind::Ekf, EstimatorKind::Ukf}) {
    const StepRecord r = estimator_force_step(mav, k, 1.0, 6.0);
    double ts = -1.0;
    for (std::size_t i = 0; i < r.u.size(); ++i)
      if (r.u[i] > 0.5) {
        ts = r.t[i];
        break;
      }
    double settle = r.t.front();
    for (std::size_t i = r.y.size(); i-- > 0;)
      if (std::abs(r.y[i] - 1.0) > kEstBand) {
        settle = i + 1 < r.t.size() ? r.t[i + 1] : r.t[i];
        break;
      }
    const double tau = fit_time_constant(r.t, r.y, ts, r.y.back());
    const bool ok = ts >= 0 && settle - ts <= kEstSettle && tau >= kTauLo && tau <= kTauHi &&
                    std::abs(r.y.back() - 1.0) <= kEstBand;
    pass = pass && ok;
    detail += fmt("%s settle %.2f s tau %.3f s final %.4f; ", to_string(k), settle - ts, tau,
                  r.y.back());
  }
  const double rt = seconds_since(t0);
  pass = pass && rt < kC2Runtime;
  report(2, "estimator-convergence", pass, detail + fmt("%.2f s", rt));
}

void criterion_3() {
  bool pass = true;
  std::string detail;
  for (EstimatorKind k : {EstimatorKind::Ekf, EstimatorKind::Ukf}) {
    Scenario sc = beam_step_scenario(8, 6);
    sc.estimator = k;
    sc.duration = 60.0;
    sc.noise.enabled = true;
    const RunResult r = run_scenario_ex(sc, RunOptions{true});
    const bool ok = r.covariance.checks > 0 && r.covariance.max_asymmetry < kAsymTol &&
                    r.covariance.min_eigenvalue > kEigTol;
    pass = pass && ok;
    detail += fmt("%s asym %.1e min eig %.1e over %ld checks; ", to_string(k),
                  r.covariance.max_asymmetry, r.covariance.min_eigenvalue, r.covariance.checks);
  }
  // Affine maps are propagated exactly by the unscented transform.
  std::mt19937_64 rng(303);
  std::normal_distribution<double> n;
  auto vec = [&] {
    Vec16 v;
    for (int i = 0; i < 16; ++i)
      v[i] = n(rng);
    return v;
  };
  auto cov = [&] {
    Mat16 A;
    for (int j = 0; j < 16; ++j)
      A.col(j) = vec();
    return Mat16(A * A.transpose() / 16.0 + 1e-3 * Mat16::Identity());
  };
  const UkfConfig cfg = UkfConfig::standard();
  double ut = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec16 m = vec(), b = vec();
    const Mat16 P = cov(), A = cov() - 0.5 * Mat16::Identity();
    const auto pts = ukf_sigma_points(m, P, cfg);
    Vec16 ym = Vec16::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i)
      ym += cfg.w_m[i] * (A * pts[i] + b);
    Mat16 Py = Mat16::Zero();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Vec16 d = A * pts[i] + b - ym;
      Py += cfg.w_c[i] * d * d.transpose();
    }
    ut = std::max({ut, (ym - (A * m + b)).cwiseAbs().maxCoeff(),
                   (Py - A * P * A.transpose()).cwiseAbs().maxCoeff()});
  }
  pass = pass && ut < kUtTol;
  report(3, "covariance-hygiene", pass, detail + fmt("UT affine %.1e (tol %.0e)", ut, kUtTol));
}

void criterion_4() {
  const double Ts = 0.01;
  AdmittanceParams p = AdmittanceParams::horizontal(8, 6);
  AdmittanceState s = engage(AdmittanceState{}, Vec3::Zero());
  const int settle = static_cast<int>(std::lround(5 * 8.0 / 6.0 / Ts));
  for (int k = 0; k < settle; ++k)
    s = admittance_step(s, Vec3(6, 0, 0), p, Ts);
  // M v' + C v = F from rest: v(t) = F/C (1 - exp(-C t / M)).
  const double v_exact = 1.0 - std::exp(-6.0 / 8.0 * settle * Ts);
  const double e_vel = std::abs(s.Lr_dot.x() - 1.0);
  const double e_exact = std::abs(s.Lr_dot.x() - v_exact);
  p.K.x() = 4.0;
  AdmittanceState sp = engage(AdmittanceState{}, Vec3::Zero());
  for (int k = 0; k < 6000; ++k)
    sp = admittance_step(sp, Vec3(6, 0, 0), p, Ts);
  const double e_spring = std::abs(sp.Lr.x() - 6.0 / 4.0) / (6.0 / 4.0);
  report(4, "admittance-analytic", e_vel < kAdmTol && e_exact < 1e-9 && e_spring < kAdmTol,
         fmt("velocity %.5f m/s (rel err %.2e), vs closed form %.1e, spring offset rel err "
             "%.2e (tol %.0e)",
             s.Lr_dot.x(), e_vel, e_exact, e_spring, kAdmTol));
}

void criterion_5() {
  const AdmittanceParams p;
  bool pass = true;
  int transitions = 0;
  double worst = 0.0;
  for (double f : {0.5, 0.8}) {
    const double A = 1.0, T = 4.0, half = 0.5 / f;
    std::vector<std::pair<double, bool>> want, got;
    const double up = std::asin(p.F_up / A) / (2 * M_PI * f);
    const double low = std::asin(p.F_low / A) / (2 * M_PI * f);
    for (double c = 0.0; c < T; c += half) {
      if (c + up + p.T_up <= T)
        want.push_back({c + up + p.T_up, true});
      if (c + half - low + p.T_low <= T)
        want.push_back({c + half - low + p.T_low, false});
    }
    AdmittanceState s = engage(AdmittanceState{}, Vec3::Zero());
    for (int k = 1; k <= std::lround(T / kFsmTick); ++k) {
      const double t = k * kFsmTick;
      const bool before = s.generating[0];
      s = fsm_step(s, Vec3(A * std::sin(2 * M_PI * f * t), 0, 0), kFsmTick, FsmCommand::None,
                   p);
      if (s.generating[0] != before)
        got.push_back({t, s.generating[0]});
    }
    if (got.size() != want.size()) {
      pass = false;
      continue;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      pass = pass && got[i].second == want[i].second;
      worst = std::max(worst, std::abs(got[i].first - want[i].first));
    }
    transitions += static_cast<int>(got.size());
  }
  pass = pass && worst <= kFsmTick + 1e-9;
  report(5, "fsm-schedule", pass,
         fmt("%d transitions, worst timing error %.4f s (tol one tick %.2f s)", transitions,
             worst, kFsmTick));
}

void criterion_6() {
  const auto t0 = Clock::now();
  const RunLog good = run_scenario(beam_step_scenario(8, 6));
  double last_big = 0.0;
  for (const auto &s : good.samples)
    if (s.agents[1].F_hat.norm() >= kForceSettled)
      last_big = s.t;
  const bool good_ok = !good.diverged && last_big < kForceWindow;
  const double M_bad = 0.5, C_bad = 0.05;
  const Scenario bad_sc = beam_step_scenario(M_bad, C_bad);
  const MarginResult m =
      margins_at(analysis_config_for(bad_sc), M_bad, C_bad, default_margin_config());
  const RunLog bad = run_scenario(bad_sc);
  const double rt = seconds_since(t0);
  const bool bad_ok = m.rs_margin < kBadMargin && bad.diverged;
  report(6, "two-agent-transport", good_ok && bad_ok && rt < kC6Runtime,
         fmt("(8,6): |F_hat| < %.1f N after %.2f s, diverged %d; (%.1f,%.2f): rs %.3f (%s), "
             "diverged %d at %.2f s (%s); %.1f s",
             kForceSettled, last_big, good.diverged, M_bad, C_bad, m.rs_margin,
             m.note.c_str(), bad.diverged, bad.divergence_time, bad.divergence_reason.c_str(),
             rt));
}

struct Sweep {
  int n;
  std::vector<MarginResult> rows;
  double max_rs = 0.0;
  int robust = 0;
};

void criteria_7_8() {
  const auto t0 = Clock::now();
  const MarginConfig cfg = default_margin_config().coarse();
  const TuningGrid grid = TuningGrid::uniform(0.0, 30.0, 31);
  std::vector<Sweep> sweeps;
  bool c7 = true;
  std::string d7;
  for (int n : {2, 3, 5}) {
    Sweep sw{n, margins(analysis_config_for(polygon_scenario(n, 8, 6)), grid, cfg), 0.0, 0};
    std::vector<const MarginResult *> robust;
    for (const auto &r : sw.rows) {
      sw.max_rs = std::max(sw.max_rs, r.rs_margin);
      if (r.rs_margin > 1.0)
        robust.push_back(&r);
    }
    sw.robust = static_cast<int>(robust.size());
    // Evenly spaced picks through the robust set.
    std::vector<const MarginResult *> picks;
    const int want = std::min<int>(kSamplesPerCount, robust.size());
    for (int i = 0; i < want; ++i)
      picks.push_back(robust[(i * robust.size()) / want]);
    int bounded = 0, runs = 0;
    std::string diverged;
    for (const MarginResult *r : picks)
      for (double factor : {0.5, 1.5}) {
        Scenario sc = polygon_scenario(n, r->M, r->C);
        sc.payload_mass_factor = factor;
        const RunLog log = run_scenario(sc);
        ++runs;
        if (!log.diverged)
          ++bounded;
        else
          diverged += fmt(" (%g,%g,x%.1f)", r->M, r->C, factor);
      }
    const bool ok = static_cast<int>(picks.size()) >= kSamplesPerCount && bounded == runs;
    c7 = c7 && ok;
    d7 += fmt("n=%d %d/%d runs bounded over %zu robust picks%s; ", n, bounded, runs,
              picks.size(), diverged.c_str());
    sweeps.push_back(std::move(sw));
  }
  const double rt = seconds_since(t0);
  c7 = c7 && rt < kSweepRuntime;
  report(7, "margin-sim-crosscheck", c7, d7 + fmt("%.0f s", rt));

  bool nonincreasing = true, nonempty = true;
  std::string d8;
  for (std::size_t i = 0; i < sweeps.size(); ++i) {
    if (i > 0 && sweeps[i].max_rs > sweeps[i - 1].max_rs)
      nonincreasing = false;
    nonempty = nonempty && sweeps[i].robust > 0;
    d8 += fmt("n=%d max rs %.4f robust %d/%zu; ", sweeps[i].n, sweeps[i].max_rs,
              sweeps[i].robust, sweeps[i].rows.size());
  }
  d8 += fmt("max rs non-increasing: %s, robust set nonempty: %s",
            nonincreasing ? "yes" : "no", nonempty ? "yes" : "no");
  report(8, "margin-trend", nonincreasing && nonempty, d8);
}

bool same_payload(const RunLog &a, const RunLog &b) {
  if (a.samples.size() != b.samples.size() || a.diverged != b.diverged)
    return false;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    const LogSample &x = a.samples[k], &y = b.samples[k];
    if (x.t != y.t || x.p != y.p || x.v != y.v || x.omega != y.omega || x.q.v != y.q.v ||
        x.q.s != y.q.s)
      return false;
  }
  return true;
}

void criterion_9() {
  int cases = 0, identical = 0;
  for (int n : {2, 5}) {
    const Scenario sc = n == 2 ? beam_step_scenario(8, 6) : polygon_scenario(n, 8, 6);
    const RunLog base = run_scenario(sc);
    for (int i = 0; i < n; ++i) {
      Scenario s = sc;
      s.agent_inertia_scale.assign(n, 1.0);
      s.agent_inertia_scale[i] = 10.0;
      ++cases;
      identical += same_payload(base, run_scenario(s));
    }
  }
  report(9, "joint-decoupling", identical == cases,
         fmt("%d/%d single-agent 10x inertia runs with bit-identical payload log", identical,
             cases));
}

void criterion_10() {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ReducedModel m = ReducedModel::from(MavParams());
  double ekf = 0.0;
  for (int k = 0; k < kJacStates; ++k) {
    Vec18 x;
    for (int i = 0; i < 18; ++i)
      x[i] = u(rng);
    x.segment<3>(0) *= 5.0;
    x.segment<2>(6) *= 0.5;
    x[8] *= 3.0;
    x.segment<3>(12) *= 5.0;
    x.segment<3>(15) *= 0.5;
    EkfInput in;
    in.roll_cmd = 0.3 * u(rng);
    in.pitch_cmd = 0.3 * u(rng);
    in.yaw_cmd = x[8] + 2.0 * u(rng);
    in.thrust = 35.0 + 15.0 * u(rng);
    Mat18 fd;
    for (int j = 0; j < 18; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      Vec18 xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      fd.col(j) = (ekf_process_rate(xp, in, m) - ekf_process_rate(xm, in, m)) / (2 * h);
    }
    ekf = std::max(ekf, jacobian_error(ekf_process_jacobian(x, in, m), fd));
  }
  const AnalysisModel model(AnalysisConfig::polygon(3, 8, 6));
  const int nx = model.nx(), nu = model.nu();
  double lin = 0.0;
  for (int k = 0; k < kJacStates; ++k) {
    VectorXd x = model.rest_state();
    for (int i = 0; i < nx; ++i)
      x[i] += 0.05 * u(rng);
    const VectorXd w = VectorXd::Constant(2, 0.3 + 0.2 * u(rng));
    const LinearSystem ad = linearize_at(model, x, w).sys;
    MatrixXd A(nx, nx), B(nx, nu + 2);
    const VectorXd u0 = VectorXd::Zero(nu);
    for (int j = 0; j < nx + nu + 2; ++j) {
      VectorXd xp = x, xm = x, up = u0, um = u0, wp = w, wm = w;
      double h = 1e-6;
      if (j < nx) {
        h *= std::max(1.0, std::abs(x[j]));
        xp[j] += h;
        xm[j] -= h;
      } else if (j < nx + nu) {
        up[j - nx] += h;
        um[j - nx] -= h;
      } else {
        wp[j - nx - nu] += h;
        wm[j - nx - nu] -= h;
      }
      const VectorXd col = (model.rate(xp, wp, up) - model.rate(xm, wm, um)) / (2 * h);
      if (j < nx)
        A.col(j) = col;
      else
        B.col(j - nx) = col;
    }
    lin = std::max({lin, jacobian_error(ad.A, A), jacobian_error(ad.B, B)});
  }
  report(10, "jacobian-checks", ekf < kJacTol && lin < kJacTol,
         fmt("EKF process %.2e, linearize %.2e over %d states each (tol %.0e)", ekf, lin,
             kJacStates, kJacTol));
}

void criterion_11() {
  Scenario sc = beam_step_scenario(8, 6);
  sc.noise.enabled = true;
  const bool same = runlog_to_csv(run_scenario(sc)) == runlog_to_csv(run_scenario(sc));
  std::vector<Vec3> p;
  for (double Ts : {2e-3, 1e-3, 5e-4}) {
    Scenario s = beam_step_scenario(8, 6);
    s.master.kind = ReferenceScript::Kind::Smooth;
    s.master.delta = Vec3(0.5, 0.2, 0.0);
    s.master.duration = 3.0;
    s.fsm_enabled = false;
    s.duration = 5.0;
    s.Ts_dyn = Ts;
    p.push_back(run_scenario(s).last().p);
  }
  const double d1 = (p[0] - p[1]).norm(), d2 = (p[1] - p[2]).norm();
  const double order = d2 > 0 ? std::log2(d1 / d2) : 0.0;
  report(11, "determinism-and-order", same && order >= kMinOrder,
         fmt("identical logs: %s; Ts halving differences %.2e, %.2e, observed order %.2f "
             "(min %.0f)",
             same ? "yes" : "no", d1, d2, order, kMinOrder));
}

} // namespace

// Optional arguments select criteria by number.
int main(int argc, char **argv) {
  const auto t0 = Clock::now();
  std::vector<int> only;
  for (int i = 1; i < argc; ++i)
    only.push_back(std::atoi(argv[i]));
  const std::vector<std::function<void()>> runs{criterion_1, criterion_2, criterion_3,
                                                criterion_4, criterion_5, criterion_6,
                                                criteria_7_8, criterion_9, criterion_10,
                                                criterion_11};
  const int ids[] = {1, 2, 3, 4, 5, 6, 7, 9, 10, 11};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto &run = runs[i];
    if (!only.empty() && std::find(only.begin(), only.end(), ids[i]) == only.end())
      continue;
    try {
      run();
    } catch (const std::exception &e) {
      std::printf("FAIL exception: %s\n", e.what());
      ++g_failures;
    }
  }
  std::printf("acceptance: %d failing criteria, %.0f s\n", g_failures, seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
