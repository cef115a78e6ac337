#pragma once

#include "cotrans/attitude.hpp"

#include <array>
#include <string>

namespace cotrans {

struct AdmittanceParams {
  Vec3 M{8.0, 8.0, 4.0};
  Vec3 C{6.0, 6.0, 20.0};
  Vec3 K{0.0, 0.0, 25.0};
  double J_psi = 1.0;
  double C_psi = 1.0;
  double K_psi = 0.0;
  bool yaw_enabled = false;

  double F_up = 0.6;    // engagement threshold, N
  double F_low = 0.3;   // disengagement threshold, N
  double T_up = 0.1;    // s
  double T_low = 0.05;  // s
  double T_avg = 2.0;   // offset averaging window, s

  static AdmittanceParams horizontal(double M, double C);
  void validate() const;
};

enum class FsmMode { Disengaged, Idle, Calibrating, TrackingBelowThreshold, Generating };
enum class FsmCommand { None, Engage, Disengage, ComputeOffset, RemoveOffset };

const char *to_string(FsmMode m);
FsmMode fsm_mode_from_string(const std::string &s);

struct AdmittanceState {
  Vec3 Lr = Vec3::Zero(), Lr_dot = Vec3::Zero(), Lr_ddot = Vec3::Zero();
  Vec3 Ld = Vec3::Zero(), Ld_dot = Vec3::Zero(), Ld_ddot = Vec3::Zero();
  double psi_r = 0.0, psi_r_dot = 0.0, psi_d = 0.0;

  FsmMode mode = FsmMode::Disengaged;
  bool estimates_ready = false;
  std::array<bool, 3> generating{false, false, false};
  Vec3 timer_up = Vec3::Zero();
  Vec3 timer_low = Vec3::Zero();

  Vec3 offset = Vec3::Zero();
  Vec3 calib_sum = Vec3::Zero();
  double calib_time = 0.0;

  bool engaged() const {
    return mode == FsmMode::Idle || mode == FsmMode::Generating ||
           mode == FsmMode::TrackingBelowThreshold;
  }
};

// Zero-order-hold discretization of M e'' + C e' + K e = u for one axis:
// [e, e']_{k+1} = Phi [e, e']_k + Gamma u_k.
struct AxisDiscretization {
  Eigen::Matrix2d Phi;
  Eigen::Vector2d Gamma;
};
AxisDiscretization discretize_axis(double M, double C, double K, double Ts);

// Integrates M(Ld'' - Lr'') + C(Ld' - Lr') + K(Ld - Lr) = -F over Ts with F
// held. The desired trajectory is advanced with constant acceleration.
AdmittanceState admittance_step(const AdmittanceState &st, const Vec3 &F,
                                const AdmittanceParams &params, double Ts);
AdmittanceState yaw_admittance_step(const AdmittanceState &st, double Mz,
                                    const AdmittanceParams &params, double Ts);

// Threshold logic, calibration and user commands. F_raw is the estimator
// output before offset removal.
AdmittanceState fsm_step(const AdmittanceState &st, const Vec3 &F_raw, double dt,
                         FsmCommand cmd, const AdmittanceParams &params);

AdmittanceState engage(const AdmittanceState &st, const Vec3 &position,
                       double yaw = 0.0);

// Offset-corrected force restricted to the axes currently generating.
Vec3 admittance_input(const AdmittanceState &st, const Vec3 &F_raw);

// One controller tick: FSM update followed by reference generation.
AdmittanceState admittance_tick(const AdmittanceState &st, const Vec3 &F_raw,
                                double Mz, double Ts, FsmCommand cmd,
                                const AdmittanceParams &params);

} // namespace cotrans
