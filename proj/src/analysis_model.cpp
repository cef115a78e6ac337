#include "cotrans/analysis_model.hpp"
#include "cotrans/mutation.hpp"

#include "cotrans/errors.hpp"

#include <Eigen/LU>
#include <cmath>
#include <unsupported/Eigen/AutoDiff>

namespace cotrans {

using AD = Eigen::AutoDiffScalar<VectorXd>;

AnalysisConfig AnalysisConfig::polygon(int n, double M, double C, double m_p,
                                       double side) {
  AnalysisConfig c;
  c.n_agents = n;
  c.payload = polygon_payload(m_p, n, side);
  c.admittance = AdmittanceParams::horizontal(M, C);
  return c;
}

double AnalysisConfig::lateral_limit() const {
  return std::sin(mav.phi_cmd_max) * mav.F_prop_max;
}

double AnalysisConfig::ff_mass() const {
  return feedforward_mass > 0.0 ? feedforward_mass
                                : mav.m + payload.m_p / n_agents;
}

void AnalysisConfig::validate() const {
  if (n_agents < 2)
    throw SingularAssembly("analysis needs a master and at least one slave");
  if (static_cast<int>(payload.attachments.size()) != n_agents)
    throw SingularAssembly("attachment count does not match the agent count");
  if ((admittance.M.array() <= 0).any() || (admittance.C.array() <= 0).any())
    throw SingularAssembly("admittance mass and damping must be positive");
  if (tau_est <= 0 || mav.tau_att <= 0)
    throw SingularAssembly("time constants must be positive");
}

const char *to_string(OperatingPoint op) {
  return op == OperatingPoint::Rest ? "rest" : "transport";
}

AnalysisModel::AnalysisModel(AnalysisConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::vector<double> masses(n(), cfg_.mav.m);
  const SystemInertia in = system_mass_inertia(cfg_.payload, masses);
  m_sys_ = in.m_sys;
  J_sys_inv_ = in.J_sys.inverse();
  const auto &r = cfg_.payload.attachments;
  roll_locked_ = true;
  for (const auto &a : r)
    roll_locked_ = roll_locked_ && std::abs(a[1]) < 1e-12 && std::abs(a[2]) < 1e-12;

  const char *ax[3] = {"x", "y", "z"};
  auto push3 = [&](std::vector<std::string> &v, const std::string &p) {
    for (auto a : ax)
      v.push_back(p + "_" + a);
  };
  states_ = {"p_z"};
  push3(states_, "v");
  push3(states_, "eta");
  push3(states_, "omega");
  for (int i = 0; i < n(); ++i) {
    const std::string a = "agent" + std::to_string(i);
    states_.push_back(a + "_e_x");
    states_.push_back(a + "_e_y");
    push3(states_, a + "_F");
  }
  for (int k = 0; k < n() - 1; ++k) {
    const std::string a = "slave" + std::to_string(k + 1);
    states_.push_back(a + "_Lr_z");
    push3(states_, a + "_Lr_dot");
    push3(states_, a + "_Fhat");
  }

  push3(inputs_, "u_mass");
  push3(inputs_, "u_inertia");
  for (int i = 0; i < n(); ++i)
    push3(inputs_, "u_pos" + std::to_string(i));
  for (int i = 0; i < n(); ++i)
    push3(inputs_, "u_att" + std::to_string(i));
  for (int k = 1; k < n(); ++k)
    push3(inputs_, "u_est" + std::to_string(k));
  inputs_.push_back("w_x");
  inputs_.push_back("w_y");

  push3(outputs_, "y_mass");
  push3(outputs_, "y_inertia");
  for (int i = 0; i < n(); ++i)
    push3(outputs_, "y_pos" + std::to_string(i));
  for (int i = 0; i < n(); ++i)
    push3(outputs_, "y_att" + std::to_string(i));
  for (int k = 1; k < n(); ++k)
    push3(outputs_, "y_est" + std::to_string(k));
  for (int i = 0; i < n(); ++i) {
    outputs_.push_back("z" + std::to_string(i) + "_x");
    outputs_.push_back("z" + std::to_string(i) + "_y");
  }
  push3(outputs_, "v_payload");
  outputs_.push_back("v_master_x");
  outputs_.push_back("v_master_y");
}

namespace {

template <class S> using V3 = Eigen::Matrix<S, 3, 1>;
template <class S> using M3 = Eigen::Matrix<S, 3, 3>;

template <class S> M3<S> rot_zyx(const V3<S> &e) {
  using std::cos;
  using std::sin;
  const S cr = cos(e[0]), sr = sin(e[0]), cp = cos(e[1]), sp = sin(e[1]);
  const S cy = cos(e[2]), sy = sin(e[2]);
  M3<S> R;
  R << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
      sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
      -sp, cp * sr, cp * cr;
  return R;
}

template <class S> M3<S> euler_rate(const V3<S> &e) {
  using std::cos;
  using std::sin;
  const S cr = cos(e[0]), sr = sin(e[0]), cp = cos(e[1]), sp = sin(e[1]);
  const S tp = sp / cp;
  M3<S> W;
  W << S(1), sr * tp, cr * tp, S(0), cr, -sr, S(0), sr / cp, cr / cp;
  return W;
}

template <class S> S clip(const S &v, double lim) {
  if (v > S(lim))
    return S(lim);
  if (v < S(-lim))
    return S(-lim);
  return v;
}

} // namespace

template <class S>
void AnalysisModel::eval(const Eigen::Matrix<S, -1, 1> &x,
                         const Eigen::Matrix<S, -1, 1> &w,
                         const Eigen::Matrix<S, -1, 1> &u,
                         Eigen::Matrix<S, -1, 1> &dx,
                         Eigen::Matrix<S, -1, 1> &y) const {
  const int N = n();
  const auto &mav = cfg_.mav;
  const auto &adm = cfg_.admittance;
  const double g = kGravity;
  const V3<S> ez(S(0), S(0), S(1));
  const M3<S> Jinv = J_sys_inv_.cast<S>();
  const V3<S> Kd = cfg_.agent_drag.cast<S>() * S(mutation_sign(Mutation::AnalysisDrag));
  const V3<S> KP = mav.K_P.cast<S>(), KD = mav.K_D.cast<S>();
  const double lim = cfg_.lateral_limit();
  const double share = cfg_.ff_mass();

  dx = Eigen::Matrix<S, -1, 1>::Zero(nx());
  y = Eigen::Matrix<S, -1, 1>::Zero(ny());

  const S pz = x[0];
  const V3<S> v = x.template segment<3>(1);
  const V3<S> eta = x.template segment<3>(4);
  const V3<S> om = x.template segment<3>(7);
  const M3<S> R = rot_zyx<S>(eta);
  const V3<S> um = u.template segment<3>(0);
  const V3<S> uJ = u.template segment<3>(3);

  std::vector<V3<S>> Fa(N), vi(N), r(N);
  V3<S> Ftot = V3<S>::Zero(), Mtot = V3<S>::Zero();
  for (int i = 0; i < N; ++i) {
    const int o = agent_offset(i);
    r[i] = cfg_.payload.attachments[i].cast<S>();
    const V3<S> e(x[o], x[o + 1], S(0));
    const V3<S> F = x.template segment<3>(o + 2);
    vi[i] = v + R * om.cross(r[i]);
    const S piz = pz + (R * r[i])[2];
    S Lz;
    V3<S> Ld;
    if (i == 0) {
      Lz = S(cfg_.altitude);
      Ld = V3<S>(w[0], w[1], S(0));
    } else {
      const int so = slave_offset(i - 1);
      Lz = x[so];
      Ld = x.template segment<3>(so + 1);
    }
    const V3<S> err(e[0], e[1], Lz - piz);
    const V3<S> fb = KP.cwiseProduct(err) + KD.cwiseProduct(Ld - vi[i]);
    V3<S> Fc = fb + ez * S(share * g) + u.template segment<3>(6 + 3 * i);
    Fc[0] = clip(Fc[0], lim);
    Fc[1] = clip(Fc[1], lim);
    dx.template segment<3>(o + 2) = (Fc - F) / S(mav.tau_att);
    dx[o] = Ld[0] - vi[i][0];
    dx[o + 1] = Ld[1] - vi[i][1];
    Fa[i] = F + u.template segment<3>(6 + 3 * N + 3 * i);
    const V3<S> net = Fa[i] - Kd.cwiseProduct(vi[i]);
    Ftot += net;
    Mtot += r[i].cross(R.transpose() * net);
    y.template segment<3>(6 + 3 * i) = fb;
    y.template segment<3>(6 + 3 * N + 3 * i) = F;
  }

  const V3<S> vdot = (Ftot - S(cfg_.payload.m_p) * um) / S(m_sys_) - ez * S(g);
  const V3<S> J_p = cfg_.payload.J_p.cast<S>();
  // Gyroscopic term with the nominal system inertia.
  const M3<S> Jsys = J_sys_inv_.inverse().cast<S>();
  const V3<S> omd = Jinv * (Mtot - om.cross(Jsys * om) - J_p.cwiseProduct(uJ));
  dx[0] = v[2];
  dx.template segment<3>(1) = vdot;
  dx.template segment<3>(4) = euler_rate<S>(eta) * om;
  dx.template segment<3>(7) = omd;
  y.template segment<3>(0) = vdot + ez * S(g);
  y.template segment<3>(3) = omd;
  if (roll_locked_) {
    dx[4] = S(0);
    dx[7] = S(0);
    y[3] = S(0);
  }

  for (int k = 0; k < N - 1; ++k) {
    const int i = k + 1, so = slave_offset(k);
    const S Lz = x[so];
    const V3<S> Ld = x.template segment<3>(so + 1);
    const V3<S> Fh = x.template segment<3>(so + 4);
    const V3<S> ai = vdot + R * (omd.cross(r[i]) + om.cross(om.cross(r[i])));
    const V3<S> Fint = S(mav.m) * (ai + ez * S(g)) - Fa[i] + Kd.cwiseProduct(vi[i]);
    dx.template segment<3>(so + 4) = (Fint - Fh) / S(cfg_.tau_est);
    // Offset calibration removes the static share of the payload weight.
    const V3<S> Fin = Fh + u.template segment<3>(6 + 6 * N + 3 * k) +
                      ez * S((m_sys_ / N - mav.m) * g);
    V3<S> acc;
    for (int j = 0; j < 3; ++j) {
      const S spring = j == 2 ? S(adm.K[2]) * (Lz - S(cfg_.altitude)) : S(0);
      acc[j] = (Fin[j] - S(adm.C[j]) * Ld[j] - spring) / S(adm.M[j]);
    }
    dx[so] = Ld[2];
    dx.template segment<3>(so + 1) = acc;
    y.template segment<3>(6 + 6 * N + 3 * k) = Fh;
  }
  const int zo = 6 + 6 * N + 3 * (N - 1);
  for (int i = 0; i < N; ++i) {
    y[zo + 2 * i] = Fa[i][0];
    y[zo + 2 * i + 1] = Fa[i][1];
  }
  y.template segment<3>(zo + 2 * N) = v;
  y[zo + 2 * N + 3] = vi[0][0];
  y[zo + 2 * N + 4] = vi[0][1];
}

template void AnalysisModel::eval<double>(const VectorXd &, const VectorXd &,
                                          const VectorXd &, VectorXd &,
                                          VectorXd &) const;
template void AnalysisModel::eval<AD>(const Eigen::Matrix<AD, -1, 1> &,
                                      const Eigen::Matrix<AD, -1, 1> &,
                                      const Eigen::Matrix<AD, -1, 1> &,
                                      Eigen::Matrix<AD, -1, 1> &,
                                      Eigen::Matrix<AD, -1, 1> &) const;

VectorXd AnalysisModel::rate(const VectorXd &x, const VectorXd &w,
                             const VectorXd &u) const {
  VectorXd dx, y;
  eval<double>(x, w, u, dx, y);
  return dx;
}

VectorXd AnalysisModel::outputs(const VectorXd &x, const VectorXd &w,
                                const VectorXd &u) const {
  VectorXd dx, y;
  eval<double>(x, w, u, dx, y);
  return y;
}

VectorXd AnalysisModel::rest_state() const {
  VectorXd x = VectorXd::Zero(nx());
  x[0] = cfg_.altitude;
  const double g = kGravity;
  for (int i = 0; i < n(); ++i)
    x[agent_offset(i) + 4] = cfg_.ff_mass() * g;
  // Static joint force felt by each slave: its share of the payload weight.
  const double share = m_sys_ / n() - cfg_.mav.m;
  for (int k = 0; k < n() - 1; ++k) {
    x[slave_offset(k)] = cfg_.altitude;
    x[slave_offset(k) + 6] = -share * g;
  }
  return x;
}

VectorXd AnalysisModel::transport_state() const {
  VectorXd x = rest_state();
  const VectorXd w = VectorXd::Constant(2, cfg_.transport_speed);
  const VectorXd u = VectorXd::Zero(nu());
  const double h = cfg_.preroll_dt;
  const int steps = static_cast<int>(std::lround(cfg_.preroll / h));
  for (int s = 0; s < steps; ++s) {
    const VectorXd k1 = rate(x, w, u);
    const VectorXd k2 = rate(x + 0.5 * h * k1, w, u);
    const VectorXd k3 = rate(x + 0.5 * h * k2, w, u);
    const VectorXd k4 = rate(x + h * k3, w, u);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e6 ||
        x.segment<2>(4).cwiseAbs().maxCoeff() > 1.2)
      throw UnstableOperatingPoint("transport pre-roll diverged at t = " +
                                   std::to_string((s + 1) * h) + " s");
  }
  // A saturated master cannot hold the commanded velocity; the Jacobian there
  // loses the position loop and the point is not a transport trim.
  const VectorXd y = outputs(x, w, u);
  const double lim = cfg_.lateral_limit();
  if (std::abs(y[6]) >= lim || std::abs(y[7]) >= lim)
    throw UnstableOperatingPoint("master lateral force saturated in transport");
  return x;
}

namespace {

LinearSystem label(MatrixXd A, MatrixXd B, MatrixXd C, MatrixXd D,
                   const AnalysisModel &m) {
  LinearSystem s(std::move(A), std::move(B), std::move(C), std::move(D));
  s.inputs = m.input_names();
  s.outputs = m.output_names();
  return s;
}

} // namespace

Linearization linearize_at(const AnalysisModel &model, const VectorXd &x,
                           const VectorXd &w) {
  const int nx = model.nx(), nu = model.nu(), nw = model.nw();
  const int nv = nx + nu + nw;
  using VAD = Eigen::Matrix<AD, -1, 1>;
  VAD xa(nx), ua(nu), wa(nw);
  for (int i = 0; i < nx; ++i)
    xa[i] = AD(x[i], nv, i);
  for (int i = 0; i < nu; ++i)
    ua[i] = AD(0.0, nv, nx + i);
  for (int i = 0; i < nw; ++i)
    wa[i] = AD(w[i], nv, nx + nu + i);
  VAD dx, y;
  model.eval<AD>(xa, wa, ua, dx, y);

  MatrixXd A(nx, nx), B(nx, nu + nw), C(y.size(), nx), D(y.size(), nu + nw);
  auto row = [&](const AD &a) {
    VectorXd d = a.derivatives();
    if (d.size() == 0)
      d = VectorXd::Zero(nv);
    return d;
  };
  for (int i = 0; i < nx; ++i) {
    const VectorXd d = row(dx[i]);
    A.row(i) = d.head(nx).transpose();
    B.row(i) = d.tail(nu + nw).transpose();
  }
  for (int i = 0; i < y.size(); ++i) {
    const VectorXd d = row(y[i]);
    C.row(i) = d.head(nx).transpose();
    D.row(i) = d.tail(nu + nw).transpose();
  }
  return {label(A, B, C, D, model), x, w};
}

Linearization linearize(OperatingPoint op, const AnalysisModel &model) {
  if (op == OperatingPoint::Rest)
    return linearize_at(model, model.rest_state(), VectorXd::Zero(2));
  return linearize_at(model, model.transport_state(),
                      VectorXd::Constant(2, model.config().transport_speed));
}

LinearSystem finite_difference_linearization(const AnalysisModel &model,
                                             const VectorXd &x, const VectorXd &w,
                                             double h) {
  const int nx = model.nx(), nu = model.nu(), nw = model.nw();
  const VectorXd u0 = VectorXd::Zero(nu);
  const int ny = model.ny();
  MatrixXd A(nx, nx), B(nx, nu + nw), C(ny, nx), D(ny, nu + nw);
  VectorXd dxp, dxm, yp, ym;
  for (int j = 0; j < nx + nu + nw; ++j) {
    VectorXd xp = x, xm = x, up = u0, um = u0, wp = w, wm = w;
    const double base = j < nx ? x[j] : (j < nx + nu ? 0.0 : w[j - nx - nu]);
    const double step = h * std::max(1.0, std::abs(base));
    if (j < nx) {
      xp[j] += step;
      xm[j] -= step;
    } else if (j < nx + nu) {
      up[j - nx] += step;
      um[j - nx] -= step;
    } else {
      wp[j - nx - nu] += step;
      wm[j - nx - nu] -= step;
    }
    model.eval<double>(xp, wp, up, dxp, yp);
    model.eval<double>(xm, wm, um, dxm, ym);
    const VectorXd fd = (dxp - dxm) / (2 * step), yd = (yp - ym) / (2 * step);
    if (j < nx) {
      A.col(j) = fd;
      C.col(j) = yd;
    } else {
      B.col(j - nx) = fd;
      D.col(j - nx) = yd;
    }
  }
  return label(A, B, C, D, model);
}

LinearSystem build_closed_loop(const AnalysisModel &model) {
  // Every signal is a row map over z = [x; u; w] at the rest point.
  const auto &cfg = model.config();
  const int N = model.n(), nx = model.nx(), nu = model.nu(), nz = nx + nu + 2;
  const double g = kGravity;
  using Map = MatrixXd;  // rows: signal components, cols: z
  auto var = [&](int start, int len) {
    Map m = Map::Zero(len, nz);
    for (int i = 0; i < len; ++i)
      m(i, start + i) = 1.0;
    return m;
  };
  auto skew_of = [](const Vec3 &a) { return skew(a); };
  const Map pz = var(0, 1), v = var(1, 3), eta = var(4, 3), om = var(7, 3);
  const Map um = var(nx, 3), uJ = var(nx + 3, 3);
  const Map w = var(nx + nu, 2);

  std::vector<Vec3> r(N);
  std::vector<double> m_agent(N, cfg.mav.m);
  const SystemInertia in = system_mass_inertia(cfg.payload, m_agent);
  const Mat3 Jinv = in.J_sys.inverse();
  const Mat3 Kd = cfg.agent_drag.asDiagonal();
  const Mat3 KP = cfg.mav.K_P.asDiagonal(), KD = cfg.mav.K_D.asDiagonal();
  const Vec3 F0(0, 0, cfg.ff_mass() * g);

  MatrixXd Adx = MatrixXd::Zero(nx, nz);
  MatrixXd Ay = MatrixXd::Zero(model.ny(), nz);

  std::vector<Map> Fa(N), vi(N), net(N);
  Map Fsum = Map::Zero(3, nz), Msum = Map::Zero(3, nz);
  for (int i = 0; i < N; ++i) {
    r[i] = cfg.payload.attachments[i];
    const int o = model.agent_offset(i);
    const Map e = var(o, 2), F = var(o + 2, 3);
    vi[i] = v - skew_of(r[i]) * om;  // omega x r = -[r]x omega
    // p_iz = p_z + (eta x r)_z
    const Map piz = pz - (skew_of(r[i]) * eta).row(2);
    Map Lz, Ld;
    if (i == 0) {
      Lz = Map::Zero(1, nz);
      Ld = Map::Zero(3, nz);
      Ld.topRows(2) = w;
    } else {
      const int so = model.slave_offset(i - 1);
      Lz = var(so, 1);
      Ld = var(so + 1, 3);
    }
    Map err(3, nz);
    err.topRows(2) = e;
    err.row(2) = Lz - piz;
    const Map fb = KP * err + KD * (Ld - vi[i]);
    const Map Fc = fb + var(nx + 6 + 3 * i, 3);
    Adx.middleRows(o + 2, 3) = (Fc - F) / cfg.mav.tau_att;
    Adx.middleRows(o, 2) = Ld.topRows(2) - vi[i].topRows(2);
    Fa[i] = F + var(nx + 6 + 3 * N + 3 * i, 3);
    net[i] = Fa[i] - Kd * vi[i];
    Fsum += net[i];
    // r x (R^T F) with R^T F ~ F + F0 x eta at rest.
    Msum += skew_of(r[i]) * (net[i] + skew_of(F0) * eta);
    Ay.middleRows(6 + 3 * i, 3) = fb;
    Ay.middleRows(6 + 3 * N + 3 * i, 3) = F;
  }
  const Map vdot = (Fsum - cfg.payload.m_p * um) / in.m_sys;
  const Map omd = Jinv * (Msum - cfg.payload.J_p.asDiagonal() * uJ);
  Adx.row(0) = v.row(2);
  Adx.middleRows(1, 3) = vdot;
  Adx.middleRows(4, 3) = om;
  Adx.middleRows(7, 3) = omd;
  Ay.topRows(3) = vdot;
  Ay.middleRows(3, 3) = omd;
  if (model.roll_locked()) {
    Adx.row(4).setZero();
    Adx.row(7).setZero();
    Ay.row(3).setZero();
  }

  for (int k = 0; k < N - 1; ++k) {
    const int i = k + 1, so = model.slave_offset(k);
    const Map Lz = var(so, 1), Ld = var(so + 1, 3), Fh = var(so + 4, 3);
    const Map ai = vdot - skew_of(r[i]) * omd;
    const Map Fint = cfg.mav.m * ai - Fa[i] + Kd * vi[i];
    Adx.middleRows(so + 4, 3) = (Fint - Fh) / cfg.tau_est;
    const Map Fin = Fh + var(nx + 6 + 6 * N + 3 * k, 3);
    const auto &adm = cfg.admittance;
    for (int j = 0; j < 3; ++j) {
      Map acc = Fin.row(j) - adm.C[j] * Ld.row(j);
      if (j == 2)
        acc -= adm.K[2] * Lz;
      Adx.row(so + 1 + j) = acc / adm.M[j];
    }
    Adx.row(so) = Ld.row(2);
    Ay.middleRows(6 + 6 * N + 3 * k, 3) = Fh;
  }
  const int zo = 6 + 6 * N + 3 * (N - 1);
  for (int i = 0; i < N; ++i)
    Ay.middleRows(zo + 2 * i, 2) = Fa[i].topRows(2);
  Ay.middleRows(zo + 2 * N, 3) = v;
  Ay.middleRows(zo + 2 * N + 3, 2) = vi[0].topRows(2);

  return label(Adx.leftCols(nx), Adx.rightCols(nu + 2), Ay.leftCols(nx),
               Ay.rightCols(nu + 2), model);
}

Reduced remove_cyclic_states(const LinearSystem &sys, double tol) {
  std::vector<int> keep(sys.nx());
  for (int i = 0; i < sys.nx(); ++i)
    keep[i] = i;
  const double scale = std::max({1.0, sys.A.cwiseAbs().maxCoeff(),
                                 sys.C.size() ? sys.C.cwiseAbs().maxCoeff() : 0.0,
                                 sys.B.size() ? sys.B.cwiseAbs().maxCoeff() : 0.0});
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < keep.size(); ++a) {
      const int j = keep[a];
      // Drop j when nothing observes it or nothing drives it.
      double col = sys.C.col(j).cwiseAbs().maxCoeff();
      double row = sys.B.row(j).cwiseAbs().maxCoeff();
      for (int i : keep) {
        col = std::max(col, std::abs(sys.A(i, j)));
        if (i != j)
          row = std::max(row, std::abs(sys.A(j, i)));
      }
      if (col <= tol * scale || row <= tol * scale) {
        keep.erase(keep.begin() + a);
        changed = true;
        break;
      }
    }
  }
  const int k = static_cast<int>(keep.size());
  MatrixXd A(k, k), B(k, sys.nu()), C(sys.ny(), k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b)
      A(a, b) = sys.A(keep[a], keep[b]);
    B.row(a) = sys.B.row(keep[a]);
    C.col(a) = sys.C.col(keep[a]);
  }
  LinearSystem out(A, B, C, sys.D);
  out.inputs = sys.inputs;
  out.outputs = sys.outputs;
  return {out, keep};
}

} // namespace cotrans
