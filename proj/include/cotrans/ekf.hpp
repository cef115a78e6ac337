#pragma once

#include "cotrans/mav.hpp"

#include <Eigen/Core>

namespace cotrans {

using Vec18 = Eigen::Matrix<double, 18, 1>;
using Mat18 = Eigen::Matrix<double, 18, 18>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Process-model constants of the reduced-model filter, kept separate from
// the simulated vehicle so estimator and plant can be mismatched.
struct ReducedModel {
  double m = 3.5;
  Vec3 K_drag{0.2, 0.2, 0.0};
  Vec3 omega_n{8.0, 8.0, 8.0};
  Vec3 xi{1.0, 1.0, 1.0};
  Vec3 k_att{1.0, 1.0, 1.0};
  Vec3 J{0.05, 0.05, 0.09};

  static ReducedModel from(const MavParams &p);
};

// Layout: p 0..2, v 3..5, eta 6..8, omega 9..11, F_ext 12..14, M_ext 15..17.
struct EkfState {
  Vec18 x = Vec18::Zero();
  Mat18 P = Mat18::Identity();

  Vec3 force() const { return x.segment<3>(12); }
  Vec3 torque() const { return x.segment<3>(15); }
};

struct EkfInput {
  double roll_cmd = 0.0;
  double pitch_cmd = 0.0;
  double yaw_cmd = 0.0;
  double thrust = 0.0;
};

struct EkfNoise {
  Vec18 Q;  // per-step process covariance diagonal
  Vec6 R;   // measurement covariance diagonal (p, eta)

  static EkfNoise defaults();
};

Vec18 ekf_process_rate(const Vec18 &x, const EkfInput &u, const ReducedModel &m);
Mat18 ekf_process_jacobian(const Vec18 &x, const EkfInput &u,
                           const ReducedModel &m);
// One forward-Euler step of the process map.
Vec18 ekf_process_map(const Vec18 &x, const EkfInput &u, const ReducedModel &m,
                      double Ts);
Mat18 ekf_transition_jacobian(const Vec18 &x, const EkfInput &u,
                              const ReducedModel &m, double Ts);

EkfState ekf_predict(const EkfState &s, const EkfInput &u, const Vec18 &Q,
                     double Ts, const ReducedModel &m);
EkfState ekf_update(const EkfState &s, const Vec6 &z, const Vec6 &R);

EkfState ekf_initial_state(const Vec3 &p, const EulerAngles &eta,
                           const Vec3 &F_ext = Vec3::Zero());

// First-order nominal estimator: dF_hat/dt.
Vec3 nominal_estimator_model(const Vec3 &F_hat, const Vec3 &F_true, double tau_est);
// Exact zero-order-hold step of the same lag.
Vec3 nominal_estimator_step(const Vec3 &F_hat, const Vec3 &F_true, double tau_est,
                            double Ts);

} // namespace cotrans
