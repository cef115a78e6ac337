#include "cotrans/admittance.hpp"

#include "cotrans/errors.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace cotrans {

namespace {
constexpr double kTimerSlack = 1e-9;
}

AdmittanceParams AdmittanceParams::horizontal(double M, double C) {
  AdmittanceParams p;
  p.M.head<2>().setConstant(M);
  p.C.head<2>().setConstant(C);
  return p;
}

void AdmittanceParams::validate() const {
  if ((M.array() <= 0).any() || (C.array() <= 0).any() || (K.array() < 0).any())
    throw ConfigError("admittance: M and C must be positive, K non-negative");
  if (!(F_up > F_low && F_low > 0))
    throw ConfigError("admittance: thresholds must satisfy F_up > F_low > 0");
  if (T_up <= 0 || T_low <= 0 || T_avg <= 0)
    throw ConfigError("admittance: timers must be positive");
  if (yaw_enabled && (J_psi <= 0 || C_psi <= 0 || K_psi < 0))
    throw ConfigError("admittance: invalid yaw parameters");
}

const char *to_string(FsmMode m) {
  switch (m) {
  case FsmMode::Disengaged: return "disengaged";
  case FsmMode::Idle: return "idle";
  case FsmMode::Calibrating: return "calibrating";
  case FsmMode::TrackingBelowThreshold: return "below_threshold";
  case FsmMode::Generating: return "generating";
  }
  return "unknown";
}

FsmMode fsm_mode_from_string(const std::string &s) {
  for (FsmMode m : {FsmMode::Disengaged, FsmMode::Idle, FsmMode::Calibrating,
                    FsmMode::TrackingBelowThreshold, FsmMode::Generating})
    if (s == to_string(m))
      return m;
  throw LogFormatError("unknown fsm mode '" + s + "'");
}

AxisDiscretization discretize_axis(double M, double C, double K, double Ts) {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  A(0, 1) = 1.0;
  A(1, 0) = -K / M;
  A(1, 1) = -C / M;
  A(1, 2) = 1.0 / M;
  const Eigen::Matrix3d E = (A * Ts).exp();
  return {E.topLeftCorner<2, 2>(), E.block<2, 1>(0, 2)};
}

AdmittanceState admittance_step(const AdmittanceState &st, const Vec3 &F,
                                const AdmittanceParams &params, double Ts) {
  AdmittanceState out = st;
  out.Ld = st.Ld + Ts * st.Ld_dot + 0.5 * Ts * Ts * st.Ld_ddot;
  out.Ld_dot = st.Ld_dot + Ts * st.Ld_ddot;
  for (int j = 0; j < 3; ++j) {
    const AxisDiscretization d = discretize_axis(params.M[j], params.C[j], params.K[j], Ts);
    // Deviation e = Lr - Ld obeys M e'' + C e' + K e = F.
    const Eigen::Vector2d e(st.Lr[j] - st.Ld[j], st.Lr_dot[j] - st.Ld_dot[j]);
    const Eigen::Vector2d en = d.Phi * e + d.Gamma * F[j];
    out.Lr[j] = out.Ld[j] + en[0];
    out.Lr_dot[j] = out.Ld_dot[j] + en[1];
    out.Lr_ddot[j] = out.Ld_ddot[j] +
                     (F[j] - params.C[j] * en[1] - params.K[j] * en[0]) / params.M[j];
  }
  return out;
}

AdmittanceState yaw_admittance_step(const AdmittanceState &st, double Mz,
                                    const AdmittanceParams &params, double Ts) {
  AdmittanceState out = st;
  if (!params.yaw_enabled) {
    out.psi_r = st.psi_d;
    out.psi_r_dot = 0.0;
    return out;
  }
  const AxisDiscretization d = discretize_axis(params.J_psi, params.C_psi, params.K_psi, Ts);
  const Eigen::Vector2d e(st.psi_r - st.psi_d, st.psi_r_dot);
  const Eigen::Vector2d en = d.Phi * e + d.Gamma * Mz;
  out.psi_r = st.psi_d + en[0];
  out.psi_r_dot = en[1];
  return out;
}

AdmittanceState fsm_step(const AdmittanceState &st, const Vec3 &F_raw, double dt,
                         FsmCommand cmd, const AdmittanceParams &params) {
  AdmittanceState out = st;
  out.estimates_ready = true;

  switch (cmd) {
  case FsmCommand::None:
    break;
  case FsmCommand::Engage:
    if (st.mode != FsmMode::Disengaged)
      throw InvalidCommand("engage requires a disengaged controller");
    break;  // the pose is supplied through engage()
  case FsmCommand::Disengage:
    if (!st.engaged())
      throw InvalidCommand("disengage requires an engaged controller");
    out.mode = FsmMode::Disengaged;
    out.generating = {false, false, false};
    out.timer_up.setZero();
    out.timer_low.setZero();
    out.Lr = out.Ld;
    out.Lr_dot = out.Ld_dot;
    out.Lr_ddot = out.Ld_ddot;
    return out;
  case FsmCommand::ComputeOffset:
    if (st.mode != FsmMode::Disengaged)
      throw InvalidCommand("offset calibration requires a disengaged controller");
    out.mode = FsmMode::Calibrating;
    out.calib_sum.setZero();
    out.calib_time = 0.0;
    return out;
  case FsmCommand::RemoveOffset:
    if (st.mode == FsmMode::Calibrating)
      throw InvalidCommand("cannot remove the offset while calibrating");
    out.offset.setZero();
    break;
  }

  if (out.mode == FsmMode::Calibrating) {
    out.calib_sum += F_raw * dt;
    out.calib_time += dt;
    if (out.calib_time > params.T_avg - kTimerSlack) {
      out.offset = out.calib_sum / out.calib_time;
      out.mode = FsmMode::Disengaged;
    }
    return out;
  }
  if (!out.engaged())
    return out;

  const Vec3 F = F_raw - out.offset;
  bool any = false;
  for (int j = 0; j < 3; ++j) {
    const double a = std::abs(F[j]);
    if (!out.generating[j]) {
      out.timer_up[j] = a > params.F_up ? out.timer_up[j] + dt : 0.0;
      if (out.timer_up[j] > params.T_up + kTimerSlack) {
        out.generating[j] = true;
        out.timer_up[j] = 0.0;
      }
    } else {
      out.timer_low[j] = a < params.F_low ? out.timer_low[j] + dt : 0.0;
      if (out.timer_low[j] > params.T_low + kTimerSlack) {
        out.generating[j] = false;
        out.timer_low[j] = 0.0;
      }
    }
    any = any || out.generating[j];
  }
  if (any)
    out.mode = FsmMode::Generating;
  else if (st.mode == FsmMode::Generating || st.mode == FsmMode::TrackingBelowThreshold)
    out.mode = FsmMode::TrackingBelowThreshold;
  else
    out.mode = FsmMode::Idle;
  return out;
}

AdmittanceState engage(const AdmittanceState &st, const Vec3 &position, double yaw) {
  if (st.mode != FsmMode::Disengaged)
    throw InvalidCommand("engage requires a disengaged controller");
  AdmittanceState out = st;
  out.Ld = position;
  out.Ld_dot.setZero();
  out.Ld_ddot.setZero();
  out.Lr = position;
  out.Lr_dot.setZero();
  out.Lr_ddot.setZero();
  out.psi_d = yaw;
  out.psi_r = yaw;
  out.psi_r_dot = 0.0;
  out.generating = {false, false, false};
  out.timer_up.setZero();
  out.timer_low.setZero();
  out.mode = FsmMode::Idle;
  return out;
}

Vec3 admittance_input(const AdmittanceState &st, const Vec3 &F_raw) {
  Vec3 F = Vec3::Zero();
  for (int j = 0; j < 3; ++j)
    if (st.generating[j])
      F[j] = F_raw[j] - st.offset[j];
  return F;
}

AdmittanceState admittance_tick(const AdmittanceState &st, const Vec3 &F_raw,
                                double Mz, double Ts, FsmCommand cmd,
                                const AdmittanceParams &params) {
  AdmittanceState out = fsm_step(st, F_raw, Ts, cmd, params);
  if (!out.engaged()) {
    out.Ld = out.Ld + Ts * out.Ld_dot + 0.5 * Ts * Ts * out.Ld_ddot;
    out.Ld_dot += Ts * out.Ld_ddot;
    out.Lr = out.Ld;
    out.Lr_dot = out.Ld_dot;
    out.Lr_ddot = out.Ld_ddot;
    return out;
  }
  out = admittance_step(out, admittance_input(out, F_raw), params, Ts);
  return yaw_admittance_step(out, Mz, params, Ts);
}

} // namespace cotrans
