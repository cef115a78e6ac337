#include "cotrans/simulation.hpp"

#include "cotrans/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace cotrans {

namespace {

constexpr int kPayloadStates = 13;
constexpr int kAgentStates = 7;

double wrap_angle(double a) { return std::remainder(a, 2.0 * M_PI); }

struct Plant {
  int n = 0;
  PayloadParams payload;
  SystemInertia inertia;
  MavParams mav;
  double k_f = 1.0;

  int agent(int i) const { return kPayloadStates + kAgentStates * i; }
  int size() const { return kPayloadStates + kAgentStates * n; }
};

struct HeldInputs {
  std::vector<EkfInput> cmd;
  std::vector<Vec3> disturbance;
};

SystemState unpack(const Plant &pl, const Eigen::VectorXd &x) {
  SystemState s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.q = unstack(x.segment<4>(6));
  s.omega = x.segment<3>(10);
  s.agents.resize(pl.n);
  for (int i = 0; i < pl.n; ++i) {
    s.agents[i].q = unstack(x.segment<4>(pl.agent(i)));
    s.agents[i].omega = x.segment<3>(pl.agent(i) + 4);
  }
  return s;
}

// Normalized attitude loop: the attitude controller cancels the agent
// inertia, so the closed loop is independent of J.
Vec3 attitude_acceleration(const UnitQuaternion &q, const Vec3 &omega,
                           const EkfInput &u, const MavParams &p) {
  const Vec3 eta = quat_to_euler(q).vec();
  const Vec3 cmd(u.roll_cmd, u.pitch_cmd, u.yaw_cmd);
  Vec3 out;
  for (int k = 0; k < 3; ++k) {
    double err = p.k_att[k] * cmd[k] - eta[k];
    if (k == 2)
      err = wrap_angle(err);
    const double wn = p.omega_n[k];
    out[k] = wn * wn * err - 2.0 * p.xi[k] * wn * omega[k];
  }
  return out;
}

// Thrust plus rotor drag of agent i, world frame.
Vec3 agent_force(const Plant &pl, const UnitQuaternion &q, const Vec3 &v,
                 const EkfInput &u) {
  const Mat3 R = quat_to_rotmat(q);
  const double sum_n2 = u.thrust / pl.k_f;
  const Vec3 drag = aero_drag(R.transpose() * v, sum_n2, pl.mav.k_drag);
  return R * (Vec3(0.0, 0.0, u.thrust) - drag);
}

struct Derivative {
  Eigen::VectorXd dx;
  PayloadAccel acc;
  std::vector<Vec3> agent_forces;  // thrust + drag + disturbance, world
};

Derivative evaluate(const Plant &pl, const Eigen::VectorXd &x, const HeldInputs &in) {
  const SystemState s = unpack(pl, x);
  const Mat3 R = s.R();
  Derivative d;
  d.dx.resize(pl.size());
  d.agent_forces.resize(pl.n);
  Vec3 F = Vec3::Zero(), M = Vec3::Zero();
  for (int i = 0; i < pl.n; ++i) {
    const Vec3 wr = s.omega.cross(pl.payload.attachments[i]);
    const Vec3 v_i = s.v + R * wr;
    const Vec3 Fi = agent_force(pl, s.agents[i].q, v_i, in.cmd[i]) + in.disturbance[i];
    d.agent_forces[i] = Fi;
    const Vec3 Fp = R.transpose() * Fi;
    F += Fp;
    M += pl.payload.attachments[i].cross(Fp);
    const int o = pl.agent(i);
    d.dx.segment<4>(o) = quat_derivative(s.agents[i].q, s.agents[i].omega);
    d.dx.segment<3>(o + 4) =
        attitude_acceleration(s.agents[i].q, s.agents[i].omega, in.cmd[i], pl.mav);
  }
  d.acc = payload_dynamics(s, F, M, pl.inertia, pl.payload);
  d.dx.segment<3>(0) = s.v;
  d.dx.segment<3>(3) = d.acc.v_dot;
  d.dx.segment<4>(6) = quat_derivative(s.q, s.omega);
  d.dx.segment<3>(10) = d.acc.omega_dot;
  return d;
}

void normalize_quaternions(const Plant &pl, Eigen::VectorXd &x) {
  x.segment<4>(6).normalize();
  for (int i = 0; i < pl.n; ++i)
    x.segment<4>(pl.agent(i)).normalize();
}

Eigen::VectorXd rk4(const Plant &pl, const Eigen::VectorXd &x, const HeldInputs &in,
                    double h) {
  const Eigen::VectorXd k1 = evaluate(pl, x, in).dx;
  const Eigen::VectorXd k2 = evaluate(pl, x + 0.5 * h * k1, in).dx;
  const Eigen::VectorXd k3 = evaluate(pl, x + 0.5 * h * k2, in).dx;
  const Eigen::VectorXd k4 = evaluate(pl, x + h * k3, in).dx;
  Eigen::VectorXd out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  normalize_quaternions(pl, out);
  return out;
}

struct Measurement {
  Vec3 p, v;
  UnitQuaternion q;
  Vec3 omega;
};

struct AgentRuntime {
  EkfState ekf;
  UkfState ukf;
  Vec3 lag = Vec3::Zero();
  AdmittanceState adm;
  Measurement meas;
  RotorSpeeds rotors;
  Vec3 F_joint = Vec3::Zero();
  Vec3 Lr = Vec3::Zero(), Lr_dot = Vec3::Zero();
};

Vec3 raw_estimate(const AgentRuntime &a, EstimatorKind k) {
  switch (k) {
  case EstimatorKind::Ekf: return a.ekf.force();
  case EstimatorKind::Ukf: return a.ukf.force();
  case EstimatorKind::NominalLag: return a.lag;
  }
  return Vec3::Zero();
}

template <class MatT> void check_cov(const MatT &P, CovarianceStats &st) {
  st.max_asymmetry = std::max(st.max_asymmetry, (P - P.transpose()).cwiseAbs().maxCoeff());
  Eigen::SelfAdjointEigenSolver<MatT> es(0.5 * (P + P.transpose()), Eigen::EigenvaluesOnly);
  const double mn = es.eigenvalues().minCoeff();
  if (st.checks == 0 || mn < st.min_eigenvalue)
    st.min_eigenvalue = mn;
  ++st.checks;
}

RotorSpeeds rotors_for(const MavParams &p, const Vec3 &J, const UnitQuaternion &q,
                       const Vec3 &omega, const EkfInput &u) {
  const Vec3 alpha = attitude_acceleration(q, omega, u, p);
  const Vec3 Jw = J.cwiseProduct(omega);
  PropWrench w;
  w.F_prop = u.thrust;
  w.M_prop = J.cwiseProduct(alpha) + omega.cross(Jw);
  return rotor_speeds_for_wrench(w, p);
}

} // namespace

RunResult run_scenario_ex(const Scenario &sc, const RunOptions &opt) {
  sc.validate();
  const int n = sc.n_agents;
  Plant pl;
  pl.n = n;
  pl.payload = sc.payload_params(true);
  pl.mav = sc.mav;
  pl.k_f = sc.mav.rotors.thrust_coeff;
  pl.inertia = system_mass_inertia(pl.payload, std::vector<double>(n, sc.mav.m));
  const PayloadParams nominal = sc.payload_params(false);

  const ReducedModel ekf_model = ReducedModel::from(sc.mav);
  const FullModel ukf_model = FullModel::from(sc.mav);
  UkfConfig ukf_cfg = sc.ukf_config;
  ukf_cfg.Ts = 1.0 / sc.estimator_rate;

  const double Ts = sc.Ts_dyn;
  const int cd = sc.controller_divider(), ed = sc.estimator_divider();
  const double Tc = cd * Ts, Te = ed * Ts;
  const long steps = std::lround(sc.duration / Ts);
  const Vec3 static_share(0.0, 0.0, -nominal.m_p * kGravity / n);
  // Calibration measures the force of the payload actually carried.
  const Vec3 measured_share(0.0, 0.0, -pl.payload.m_p * kGravity / n);

  // Initial state: level payload and agents at rest.
  const double z0 = sc.mission_enabled ? 0.0 : sc.altitude;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(pl.size());
  x.segment<3>(0) = Vec3(0.0, 0.0, z0);
  x[9] = 1.0;
  for (int i = 0; i < n; ++i)
    x[pl.agent(i) + 3] = 1.0;

  std::mt19937_64 rng(sc.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto noise = [&](double sigma) {
    Vec3 e = Vec3::Zero();
    if (sc.noise.enabled)
      for (int j = 0; j < 3; ++j)
        e[j] = sigma * gauss(rng);
    return e;
  };

  auto measure = [&](const SystemState &s, int i) {
    const AgentKinematics k = agent_kinematics(s, i, pl.payload, Vec3::Zero(), Vec3::Zero());
    Measurement m;
    m.p = k.p + noise(sc.noise.sigma_p);
    m.v = k.v + noise(sc.noise.sigma_v);
    const Vec3 da = noise(sc.noise.sigma_att);
    m.q = sc.noise.enabled ? quat_multiply(mrp_to_quat(Mrp{da / 4.0, MrpConfig{}}), s.agents[i].q)
                           : s.agents[i].q;
    m.omega = s.agents[i].omega + noise(sc.noise.sigma_omega);
    return m;
  };

  HeldInputs held;
  held.cmd.resize(n);
  held.disturbance.assign(n, Vec3::Zero());
  std::vector<AgentRuntime> ag(n);
  {
    const SystemState s = unpack(pl, x);
    for (int i = 0; i < n; ++i) {
      AgentRuntime &a = ag[i];
      a.meas = measure(s, i);
      const Vec3 F_init = static_share;
      a.ekf = ekf_initial_state(a.meas.p, quat_to_euler(a.meas.q), F_init);
      a.ukf = ukf_initial_state(a.meas.p, a.meas.q, F_init);
      a.lag = F_init;
      a.adm.Ld = a.meas.p;
      a.adm.Lr = a.meas.p;
      if (i > 0 && sc.precalibrated)
        a.adm.offset = measured_share;
      held.cmd[i].thrust = (sc.mav.m + nominal.m_p / n) * kGravity;
    }
  }

  // Master reference state.
  Vec3 master_base = ag[0].meas.p;
  double release_time = sc.mission_enabled ? -1.0 : 0.0;

  MissionState ms;
  if (sc.mission_enabled) {
    std::vector<double> alt(n);
    for (int i = 0; i < n; ++i)
      alt[i] = ag[i].meas.p.z();
    ms = mission_start(mission_init(alt, sc.mission));
  }

  auto engage_slave = [&](AgentRuntime &a) {
    if (a.adm.engaged())
      return;
    a.adm = engage(a.adm, a.meas.p, 0.0);
    if (!sc.fsm_enabled) {
      a.adm.mode = FsmMode::Generating;
      a.adm.generating = {true, true, true};
    }
  };
  auto disengage_slave = [&](AgentRuntime &a) {
    if (!a.adm.engaged())
      return;
    // Hand over from the current reference so the agent holds its pose.
    a.adm.Ld = a.adm.Lr;
    a.adm.Ld_dot.setZero();
    a.adm.Ld_ddot.setZero();
    a.adm = fsm_step(a.adm, Vec3::Zero(), 0.0, FsmCommand::Disengage, sc.admittance);
  };

  if (!sc.mission_enabled && sc.engage_at_start)
    for (int i = 1; i < n; ++i)
      engage_slave(ag[i]);

  RunResult result;
  RunLog &log = result.log;
  log.scenario_hash = config_hash(scenario_to_json_text(sc));
  log.n_agents = n;
  log.rotor_count = sc.mav.rotors.rotor_count;
  log.dt = Tc;
  log.samples.reserve(steps / cd + 2);

  std::vector<bool> event_done(sc.events.size(), false);
  bool landing_sent = false;

  for (long k = 0; k <= steps; ++k) {
    const double t = k * Ts;
    const bool est_tick = k % ed == 0;
    const bool ctrl_tick = k % cd == 0;
    if (!est_tick && !ctrl_tick) {
      x = rk4(pl, x, held, Ts);
      continue;
    }

    for (int i = 0; i < n; ++i)
      held.disturbance[i] = (i == sc.force_agent && t >= sc.force_time - 1e-12) ? sc.force
                                                                               : Vec3::Zero();

    const SystemState s = unpack(pl, x);
    const Derivative der = evaluate(pl, x, held);

    if (est_tick) {
      for (int i = 0; i < n; ++i) {
        AgentRuntime &a = ag[i];
        a.meas = measure(s, i);
        const AgentKinematics kin =
            agent_kinematics(s, i, pl.payload, der.acc.omega_dot, der.acc.v_dot);
        a.F_joint = joint_interaction_force(kin.a, der.agent_forces[i], sc.mav.m) +
                    held.disturbance[i];
        if (k == 0)
          continue;
        switch (sc.estimator) {
        case EstimatorKind::Ekf: {
          a.ekf = ekf_predict(a.ekf, held.cmd[i], sc.ekf_noise.Q, Te, ekf_model);
          Vec6 z;
          z << a.meas.p, quat_to_euler(a.meas.q).vec();
          a.ekf = ekf_update(a.ekf, z, sc.ekf_noise.R);
          if (opt.check_covariance)
            check_cov(a.ekf.P, result.covariance);
          break;
        }
        case EstimatorKind::Ukf: {
          a.ukf = ukf_predict(a.ukf, a.rotors, ukf_cfg, sc.ukf_noise.Q, ukf_model);
          if (opt.check_covariance)
            check_cov(a.ukf.P, result.covariance);
          UkfMeasurement z{a.meas.p, a.meas.v, a.meas.q, a.meas.omega};
          a.ukf = ukf_update(a.ukf, z, sc.ukf_noise.R, ukf_cfg);
          if (opt.check_covariance)
            check_cov(a.ukf.P, result.covariance);
          break;
        }
        case EstimatorKind::NominalLag:
          a.lag = nominal_estimator_step(a.lag, a.F_joint, sc.mav.tau_est, Te);
          break;
        }
      }
    }

    if (!ctrl_tick) {
      x = rk4(pl, x, held, Ts);
      continue;
    }

    // Scripted commands.
    std::vector<FsmCommand> cmd(n, FsmCommand::None);
    for (std::size_t e = 0; e < sc.events.size(); ++e) {
      if (event_done[e] || sc.events[e].t > t + 1e-9)
        continue;
      event_done[e] = true;
      for (int i = 1; i < n; ++i) {
        if (sc.events[e].agent >= 0 && sc.events[e].agent != i)
          continue;
        switch (sc.events[e].command) {
        case FsmCommand::Engage: engage_slave(ag[i]); break;
        case FsmCommand::Disengage: disengage_slave(ag[i]); break;
        default: cmd[i] = sc.events[e].command; break;
        }
      }
    }

    if (sc.mission_enabled) {
      if (!landing_sent && sc.landing_time >= 0.0 && t >= sc.landing_time - 1e-9 &&
          ms.phase == MissionPhase::Transporting) {
        ms = mission_request_landing(ms);
        landing_sent = true;
      }
      std::vector<double> alt(n);
      for (int i = 0; i < n; ++i)
        alt[i] = s.p.z() + (s.R() * pl.payload.attachments[i]).z();
      const MissionStepResult r = mission_step(ms, alt);
      ms = r.state;
      const MissionCommands &mc = r.commands;
      if (mc.disengage_slaves)
        for (int i = 1; i < n; ++i)
          disengage_slave(ag[i]);
      if (mc.release_master && release_time < 0.0)
        release_time = t;
      if (ms.phase == MissionPhase::Descending && release_time >= 0.0) {
        master_base = ag[0].Lr;
        release_time = -1.0;
      }
      if (!mc.altitude_targets.empty()) {
        master_base.z() = mc.altitude_targets[0];
        for (int i = 1; i < n; ++i)
          if (!ag[i].adm.engaged())
            ag[i].adm.Ld.z() = mc.altitude_targets[i];
      }
      if (mc.engage_slaves)
        for (int i = 1; i < n; ++i)
          engage_slave(ag[i]);
    }

    LogSample sample;
    sample.t = t;
    sample.p = s.p;
    sample.v = s.v;
    sample.q = s.q;
    sample.omega = s.omega;
    sample.phase = sc.mission_enabled ? ms.phase : MissionPhase::Transporting;
    sample.agents.resize(n);

    std::string failure;
    for (int i = 0; i < n; ++i) {
      AgentRuntime &a = ag[i];
      const Vec3 F_raw = raw_estimate(a, sc.estimator);
      if (i == 0) {
        Vec3 off = Vec3::Zero(), rate = Vec3::Zero();
        if (release_time >= 0.0)
          std::tie(off, rate) = sc.master.at(t - release_time);
        a.Lr = master_base + off;
        a.Lr_dot = rate;
      } else {
        if (sc.fsm_enabled || !a.adm.engaged())
          a.adm = admittance_tick(a.adm, F_raw, 0.0, Tc, cmd[i], sc.admittance);
        else
          a.adm = admittance_step(a.adm, F_raw - a.adm.offset, sc.admittance, Tc);
        a.Lr = a.adm.Lr;
        a.Lr_dot = a.adm.Lr_dot;
      }
      AgentState st;
      st.p = a.meas.p;
      st.v = a.meas.v;
      st.q = a.meas.q;
      const Vec3 F_cmd = pd_position_control(st, a.Lr, a.Lr_dot, sc.mav, sc.ff_mass());
      const double yaw_cmd = i == 0 ? 0.0 : a.adm.psi_r;
      try {
        const AttitudeCommand ac = thrust_to_attitude(F_cmd, quat_to_euler(a.meas.q).yaw, sc.mav);
        held.cmd[i] = {ac.roll, ac.pitch, yaw_cmd, ac.thrust};
      } catch (const ZeroThrust &) {
        failure = "zero thrust command";
      }
      // Rotor speed command of the onboard allocator, which uses the configured
      // model inertia. The agent plant itself is inertia-free.
      a.rotors = rotors_for(sc.mav, sc.mav.J, s.agents[i].q, s.agents[i].omega, held.cmd[i]);

      AgentSample &as = sample.agents[i];
      const AgentKinematics kin = agent_kinematics(s, i, pl.payload, Vec3::Zero(), Vec3::Zero());
      as.p = kin.p;
      as.v = kin.v;
      as.q = s.agents[i].q;
      as.omega = s.agents[i].omega;
      as.F_prop = quat_to_rotmat(s.agents[i].q) * Vec3(0.0, 0.0, held.cmd[i].thrust);
      as.cmd = held.cmd[i];
      as.rotors = a.rotors;
      as.F_raw = F_raw;
      as.F_hat = i == 0 ? F_raw : Vec3(F_raw - a.adm.offset);
      as.F_joint = a.F_joint;
      as.Lr = a.Lr;
      as.Lr_dot = a.Lr_dot;
      as.mode = i == 0 ? FsmMode::Disengaged : a.adm.mode;

      const double tilt = std::acos(std::clamp(quat_to_rotmat(s.agents[i].q)(2, 2), -1.0, 1.0));
      if (failure.empty() && tilt > sc.bounds.max_tilt)
        failure = "agent tilt bound exceeded";
      if (failure.empty() && (a.Lr - kin.p).norm() > sc.bounds.max_tracking)
        failure = "reference tracking bound exceeded";
    }
    if (failure.empty() && !x.allFinite())
      failure = "non-finite state";
    if (failure.empty() && s.v.norm() > sc.bounds.max_speed)
      failure = "payload speed bound exceeded";
    if (failure.empty() && s.p.norm() > sc.bounds.max_position)
      failure = "payload position bound exceeded";
    log.samples.push_back(std::move(sample));
    if (!failure.empty()) {
      log.diverged = true;
      log.divergence_time = t;
      log.divergence_step = k;
      log.divergence_reason = failure;
      break;
    }
    if (k < steps)
      x = rk4(pl, x, held, Ts);
  }
  return result;
}

RunLog run_scenario(const Scenario &sc) { return run_scenario_ex(sc, RunOptions{}).log; }

// ---------------------------------------------------------------------------
// CSV log

namespace {

const char *kMagic = "# cotrans-runlog";

void put(std::ostringstream &os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ",%.17g", v);
  os << buf;
}
void put3(std::ostringstream &os, const Vec3 &v) {
  put(os, v[0]);
  put(os, v[1]);
  put(os, v[2]);
}
void putq(std::ostringstream &os, const UnitQuaternion &q) {
  put3(os, q.v);
  put(os, q.s);
}

std::vector<std::string> header(int n, int rotors) {
  std::vector<std::string> h{"t", "phase"};
  auto add3 = [&](const std::string &p, const char *a, const char *b, const char *c) {
    h.push_back(p + a);
    h.push_back(p + b);
    h.push_back(p + c);
  };
  auto addq = [&](const std::string &p) {
    add3(p + "q", "x", "y", "z");
    h.push_back(p + "qw");
  };
  add3("payload_p", "x", "y", "z");
  add3("payload_v", "x", "y", "z");
  addq("payload_");
  add3("payload_w", "x", "y", "z");
  add3("payload_", "roll", "pitch", "yaw");
  for (int i = 0; i < n; ++i) {
    const std::string a = "a" + std::to_string(i) + "_";
    add3(a + "p", "x", "y", "z");
    add3(a + "v", "x", "y", "z");
    addq(a);
    add3(a + "w", "x", "y", "z");
    add3(a, "roll", "pitch", "yaw");
    add3(a + "Fprop", "x", "y", "z");
    add3(a + "cmd_", "roll", "pitch", "yaw");
    h.push_back(a + "cmd_thrust");
    for (int r = 0; r < rotors; ++r)
      h.push_back(a + "n" + std::to_string(r));
    add3(a + "Fhat", "x", "y", "z");
    add3(a + "Fraw", "x", "y", "z");
    add3(a + "Fjoint", "x", "y", "z");
    add3(a + "Lr", "x", "y", "z");
    add3(a + "Lrdot", "x", "y", "z");
    h.push_back(a + "mode");
  }
  return h;
}

MissionPhase phase_from(const std::string &s) {
  for (MissionPhase p : {MissionPhase::Grounded, MissionPhase::Ascending,
                         MissionPhase::Transporting, MissionPhase::Descending,
                         MissionPhase::Landed})
    if (s == to_string(p))
      return p;
  throw LogFormatError("unknown mission phase '" + s + "'");
}

} // namespace

std::string runlog_to_csv(const RunLog &log) {
  std::ostringstream os;
  os << kMagic << " v" << RunLog::kVersion << " agents=" << log.n_agents
     << " rotors=" << log.rotor_count << " hash=" << log.scenario_hash;
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", log.dt);
    os << " dt=" << buf << "\n";
  }
  const auto h = header(log.n_agents, log.rotor_count);
  for (std::size_t c = 0; c < h.size(); ++c)
    os << (c ? "," : "") << h[c];
  os << "\n";
  for (const LogSample &s : log.samples) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    os << buf << "," << to_string(s.phase);
    put3(os, s.p);
    put3(os, s.v);
    putq(os, s.q);
    put3(os, s.omega);
    put3(os, quat_to_euler(s.q).vec());
    for (const AgentSample &a : s.agents) {
      put3(os, a.p);
      put3(os, a.v);
      putq(os, a.q);
      put3(os, a.omega);
      put3(os, quat_to_euler(a.q).vec());
      put3(os, a.F_prop);
      put(os, a.cmd.roll_cmd);
      put(os, a.cmd.pitch_cmd);
      put(os, a.cmd.yaw_cmd);
      put(os, a.cmd.thrust);
      for (int r = 0; r < log.rotor_count; ++r)
        put(os, r < a.rotors.size() ? a.rotors[r] : 0.0);
      put3(os, a.F_hat);
      put3(os, a.F_raw);
      put3(os, a.F_joint);
      put3(os, a.Lr);
      put3(os, a.Lr_dot);
      os << "," << to_string(a.mode);
    }
    os << "\n";
  }
  if (log.diverged) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", log.divergence_time);
    os << "# divergence t=" << buf << " step=" << log.divergence_step
       << " reason=" << log.divergence_reason << "\n";
  }
  return os.str();
}

void write_runlog_csv(const RunLog &log, const std::string &path) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write log '" + path + "'");
  out << runlog_to_csv(log);
}

RunLog runlog_from_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0)
    throw LogFormatError("missing log signature");
  RunLog log;
  {
    std::istringstream hs(line.substr(std::string(kMagic).size()));
    std::string tok;
    int version = -1;
    while (hs >> tok) {
      if (tok.rfind("v", 0) == 0 && version < 0)
        version = std::stoi(tok.substr(1));
      else if (tok.rfind("agents=", 0) == 0)
        log.n_agents = std::stoi(tok.substr(7));
      else if (tok.rfind("rotors=", 0) == 0)
        log.rotor_count = std::stoi(tok.substr(7));
      else if (tok.rfind("hash=", 0) == 0)
        log.scenario_hash = tok.substr(5);
      else if (tok.rfind("dt=", 0) == 0)
        log.dt = std::stod(tok.substr(3));
    }
    if (version != RunLog::kVersion)
      throw LogFormatError("unsupported log version");
    if (log.n_agents < 1 || log.rotor_count < 1)
      throw LogFormatError("bad log header");
  }
  if (!std::getline(in, line))
    throw LogFormatError("missing column header");
  const auto h = header(log.n_agents, log.rotor_count);
  {
    std::string expect;
    for (std::size_t c = 0; c < h.size(); ++c)
      expect += (c ? "," : "") + h[c];
    if (line != expect)
      throw LogFormatError("column header does not match version 1 layout");
  }
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    if (line[0] == '#') {
      if (line.rfind("# divergence", 0) == 0) {
        log.diverged = true;
        std::istringstream ds(line.substr(12));
        std::string tok;
        while (ds >> tok) {
          if (tok.rfind("t=", 0) == 0)
            log.divergence_time = std::stod(tok.substr(2));
          else if (tok.rfind("step=", 0) == 0)
            log.divergence_step = std::stol(tok.substr(5));
          else if (tok.rfind("reason=", 0) == 0) {
            std::string rest;
            std::getline(ds, rest);
            log.divergence_reason = tok.substr(7) + rest;
          }
        }
      }
      continue;
    }
    std::vector<std::string> f;
    {
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ','))
        f.push_back(cell);
    }
    if (f.size() != h.size())
      throw LogFormatError("row has " + std::to_string(f.size()) + " fields, expected " +
                           std::to_string(h.size()));
    std::size_t c = 0;
    auto num = [&]() {
      try {
        return std::stod(f[c++]);
      } catch (const std::exception &) {
        throw LogFormatError("bad number in column " + h[c - 1]);
      }
    };
    auto v3 = [&]() {
      Vec3 v;
      v[0] = num();
      v[1] = num();
      v[2] = num();
      return v;
    };
    auto q4 = [&]() {
      UnitQuaternion q;
      q.v = v3();
      q.s = num();
      return q;
    };
    LogSample s;
    s.t = num();
    s.phase = phase_from(f[c++]);
    s.p = v3();
    s.v = v3();
    s.q = q4();
    s.omega = v3();
    c += 3;
    s.agents.resize(log.n_agents);
    for (AgentSample &a : s.agents) {
      a.p = v3();
      a.v = v3();
      a.q = q4();
      a.omega = v3();
      c += 3;
      a.F_prop = v3();
      a.cmd.roll_cmd = num();
      a.cmd.pitch_cmd = num();
      a.cmd.yaw_cmd = num();
      a.cmd.thrust = num();
      a.rotors.resize(log.rotor_count);
      for (int r = 0; r < log.rotor_count; ++r)
        a.rotors[r] = num();
      a.F_hat = v3();
      a.F_raw = v3();
      a.F_joint = v3();
      a.Lr = v3();
      a.Lr_dot = v3();
      try {
        a.mode = fsm_mode_from_string(f[c++]);
      } catch (const Error &) {
        throw LogFormatError("bad FSM mode");
      }
    }
    if (!log.samples.empty() && !(s.t > log.samples.back().t))
      throw LogFormatError("timestamps are not increasing");
    log.samples.push_back(std::move(s));
  }
  return log;
}

RunLog read_runlog_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw LogFormatError("cannot open log '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return runlog_from_csv(ss.str());
}

std::vector<ReplaySample> replay_estimator(const RunLog &log, int agent,
                                           EstimatorKind kind, const MavParams &params) {
  if (agent < 0 || agent >= log.n_agents)
    throw IndexOutOfRange("replay: agent index out of range");
  std::vector<ReplaySample> out;
  if (log.samples.empty())
    return out;
  const ReducedModel em = ReducedModel::from(params);
  const FullModel um = FullModel::from(params);
  const EkfNoise en = EkfNoise::defaults();
  const UkfNoise un = UkfNoise::defaults();
  const UkfConfig cfg = UkfConfig::standard(log.dt);
  const AgentSample &a0 = log.samples.front().agents[agent];
  EkfState ekf = ekf_initial_state(a0.p, quat_to_euler(a0.q), a0.F_raw);
  UkfState ukf = ukf_initial_state(a0.p, a0.q, a0.F_raw);
  Vec3 lag = a0.F_raw;
  out.push_back({log.samples.front().t, a0.F_raw});
  for (std::size_t k = 1; k < log.samples.size(); ++k) {
    const AgentSample &prev = log.samples[k - 1].agents[agent];
    const AgentSample &a = log.samples[k].agents[agent];
    switch (kind) {
    case EstimatorKind::Ekf: {
      ekf = ekf_predict(ekf, prev.cmd, en.Q, log.dt, em);
      Vec6 z;
      z << a.p, quat_to_euler(a.q).vec();
      ekf = ekf_update(ekf, z, en.R);
      out.push_back({log.samples[k].t, ekf.force()});
      break;
    }
    case EstimatorKind::Ukf: {
      ukf = ukf_predict(ukf, prev.rotors, cfg, un.Q, um);
      ukf = ukf_update(ukf, {a.p, a.v, a.q, a.omega}, un.R, cfg);
      out.push_back({log.samples[k].t, ukf.force()});
      break;
    }
    case EstimatorKind::NominalLag:
      lag = nominal_estimator_step(lag, a.F_joint, params.tau_est, log.dt);
      out.push_back({log.samples[k].t, lag});
      break;
    }
  }
  return out;
}

} // namespace cotrans
