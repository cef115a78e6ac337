#pragma once

#include "cotrans/mav.hpp"

#include <Eigen/Core>
#include <vector>

namespace cotrans {

using Vec16 = Eigen::Matrix<double, 16, 1>;
using Mat16 = Eigen::Matrix<double, 16, 16>;
using Vec12 = Eigen::Matrix<double, 12, 1>;

// Full-model process constants.
struct FullModel {
  double m = 3.5;
  Vec3 J{0.05, 0.05, 0.09};
  double k_drag = 5.0e-8;
  AllocationMatrix allocation = build_allocation(RotorGeometry{});

  static FullModel from(const MavParams &p);
};

struct UkfConfig {
  double lambda = 0.0;
  double Ts = 0.01;
  MrpConfig mrp;
  std::vector<double> w_m;
  std::vector<double> w_c;

  // Point 0 weight w0, the remaining 2n share 1 - w0 equally.
  static UkfConfig standard(double Ts = 0.01, double lambda = 0.0,
                            double w0 = 0.0);
};

// Error-state layout: p 0..2, v 3..5, eps 6..8, omega 9..11, F_ext 12..14,
// M_ext_z 15. The attitude estimate lives in q, and eps is the MRP of the
// error rotation dq with q_true = dq (x) q.
struct UkfState {
  Vec16 xi = Vec16::Zero();
  Mat16 P = Mat16::Identity();
  UnitQuaternion q;

  Vec3 force() const { return xi.segment<3>(12); }
  double torque_z() const { return xi[15]; }
};

struct UkfMeasurement {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  UnitQuaternion q;
  Vec3 omega = Vec3::Zero();
};

struct UkfNoise {
  Vec16 Q;
  Vec12 R;

  static UkfNoise defaults();
};

// Square root S with S S^T = P. Falls back to an LDLT factor for
// semidefinite P and to a single 1e-9 jitter retry otherwise.
Mat16 covariance_sqrt(const Mat16 &P);

std::vector<Vec16> ukf_sigma_points(const Vec16 &xi, const Mat16 &P,
                                    const UkfConfig &cfg);

// Rotation matrix of the rotation vector v.
Mat3 rotation_from_vector(const Vec3 &v);
Mat16 ukf_reset_transform(const Vec3 &eps);

// Deterministic full-model step of one sigma point.
struct UkfPoint {
  Vec3 p, v;
  UnitQuaternion q;
  Vec3 omega, F;
  double Mz;
};
UkfPoint ukf_propagate_point(const UkfPoint &x, const RotorSpeeds &n,
                             const FullModel &model, double Ts);

UkfState ukf_predict(const UkfState &s, const RotorSpeeds &n,
                     const UkfConfig &cfg, const Vec16 &Q, const FullModel &model);
UkfState ukf_update(const UkfState &s, const UkfMeasurement &z, const Vec12 &R,
                    const UkfConfig &cfg);

// Attitude measurement as an error vector relative to the reference q_ref.
Vec3 attitude_error(const UnitQuaternion &q_meas, const UnitQuaternion &q_ref,
                    const MrpConfig &cfg);

UkfState ukf_initial_state(const Vec3 &p, const UnitQuaternion &q,
                           const Vec3 &F_ext = Vec3::Zero());

} // namespace cotrans
