#pragma once

#include "cotrans/admittance.hpp"
#include "cotrans/linear_system.hpp"
#include "cotrans/mav.hpp"
#include "cotrans/payload.hpp"

#include <string>
#include <vector>

namespace cotrans {

// Reduced coupled model used for robust analysis. Agent 0 is the master and
// follows a horizontal velocity command; all other agents are slaves running
// the nominal estimator lag and the admittance law. Agents are point masses
// rigidly attached to the payload, the thrust vector follows the command
// through a first-order lag, and perturbation inputs enter at every
// uncertainty location.
struct AnalysisConfig {
  int n_agents = 2;
  MavParams mav;
  PayloadParams payload;
  AdmittanceParams admittance;
  double tau_est = 0.2;
  double altitude = 1.2;
  double feedforward_mass = 0.0;  // 0 selects m + m_p / n
  Vec3 agent_drag{0.2, 0.2, 0.0};
  double transport_speed = 0.5;   // per horizontal axis, m/s
  double preroll = 5.0;           // s
  double preroll_dt = 0.005;      // s

  static AnalysisConfig polygon(int n, double M, double C, double m_p = 1.5,
                                double side = 1.2);
  double lateral_limit() const;
  double ff_mass() const;
  void validate() const;
};

enum class OperatingPoint { Rest, Transport };
const char *to_string(OperatingPoint op);

class AnalysisModel {
public:
  explicit AnalysisModel(AnalysisConfig cfg);

  const AnalysisConfig &config() const { return cfg_; }
  int n() const { return cfg_.n_agents; }
  int nx() const { return 10 + 5 * n() + 7 * (n() - 1); }
  int nu() const { return 6 + 6 * n() + 3 * (n() - 1); }
  int nw() const { return 2; }
  int ny() const { return 6 + 6 * n() + 3 * (n() - 1) + 2 * n() + 5; }
  // Collinear attachments leave the roll about the payload x axis free and
  // unactuated; that coordinate is held at zero.
  bool roll_locked() const { return roll_locked_; }

  const std::vector<std::string> &state_names() const { return states_; }
  const std::vector<std::string> &input_names() const { return inputs_; }
  const std::vector<std::string> &output_names() const { return outputs_; }

  // Index helpers into the state vector.
  int agent_offset(int i) const { return 10 + 5 * i; }
  int slave_offset(int k) const { return 10 + 5 * n() + 7 * k; }

  template <class S>
  void eval(const Eigen::Matrix<S, -1, 1> &x, const Eigen::Matrix<S, -1, 1> &w,
            const Eigen::Matrix<S, -1, 1> &u, Eigen::Matrix<S, -1, 1> &dx,
            Eigen::Matrix<S, -1, 1> &y) const;

  VectorXd rate(const VectorXd &x, const VectorXd &w, const VectorXd &u) const;
  VectorXd outputs(const VectorXd &x, const VectorXd &w, const VectorXd &u) const;

  VectorXd rest_state() const;
  // RK4 pre-roll under a constant velocity command.
  VectorXd transport_state() const;

private:
  AnalysisConfig cfg_;
  Mat3 J_sys_inv_;
  double m_sys_ = 0.0;
  bool roll_locked_ = false;
  std::vector<std::string> states_, inputs_, outputs_;
};

// Jacobian linearization; inputs are [u, w], outputs [y].
struct Linearization {
  LinearSystem sys;
  VectorXd x_op;
  VectorXd w_op;
};
Linearization linearize_at(const AnalysisModel &model, const VectorXd &x,
                           const VectorXd &w);
Linearization linearize(OperatingPoint op, const AnalysisModel &model);
// Central-difference Jacobian of the same map, used as an oracle.
LinearSystem finite_difference_linearization(const AnalysisModel &model,
                                             const VectorXd &x, const VectorXd &w,
                                             double h = 1e-6);

// Closed-form linearization at rest.
LinearSystem build_closed_loop(const AnalysisModel &model);
inline LinearSystem build_closed_loop(const AnalysisConfig &cfg) {
  return build_closed_loop(AnalysisModel(cfg));
}

// Repeatedly drops states that nothing observes (zero column in A and C)
// or nothing drives (zero off-diagonal row in A and zero row in B).
struct Reduced {
  LinearSystem sys;
  std::vector<int> kept;
};
Reduced remove_cyclic_states(const LinearSystem &sys, double tol = 1e-10);

} // namespace cotrans
