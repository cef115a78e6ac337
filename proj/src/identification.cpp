#include "cotrans/identification.hpp"

#include "cotrans/errors.hpp"
#include "cotrans/simulation.hpp"

#include <cmath>

namespace cotrans {

FrequencyResponse step_frequency_response(const StepRecord &rec,
                                          const std::vector<double> &omega) {
  const std::size_t n = rec.t.size();
  if (rec.u.size() != n || rec.y.size() != n || n < 2)
    throw DimensionMismatch("step record channels differ in length");
  FrequencyResponse out;
  out.omega = omega;
  for (double w : omega) {
    cd U(0.0), Y(0.0);
    for (std::size_t k = 1; k < n; ++k) {
      const cd e = std::exp(cd(0.0, -w * rec.t[k]));
      U += (rec.u[k] - rec.u[k - 1]) * e;
      Y += (rec.y[k] - rec.y[k - 1]) * e;
    }
    if (std::abs(U) < 1e-12)
      throw FitInfeasible("step record carries no input energy");
    out.value.push_back(Y / U);
  }
  return out;
}

Scenario single_agent_scenario(const MavParams &mav, EstimatorKind est) {
  Scenario sc;
  sc.name = "single-agent";
  sc.n_agents = 1;
  sc.mav = mav;
  sc.payload_mass = 0.01;
  sc.side = 0.1;
  sc.attachments = {Vec3::Zero()};
  sc.payload_inertia = Vec3::Constant(1e-4);
  sc.estimator = est;
  return sc;
}

StepRecord position_chain_step(const MavParams &mav, double step, double duration) {
  Scenario sc = single_agent_scenario(mav, EstimatorKind::NominalLag);
  sc.master.kind = ReferenceScript::Kind::Step;
  sc.master.t0 = 1.0;
  sc.master.delta = Vec3(step, 0.0, 0.0);
  sc.duration = duration;
  const RunLog log = run_scenario(sc);
  if (log.diverged)
    throw UnstableSystem("position step diverged");
  StepRecord rec;
  for (std::size_t k = 1; k < log.samples.size(); ++k) {
    const AgentSample &prev = log.samples[k - 1].agents[0];
    const AgentSample &a = log.samples[k].agents[0];
    // Command issued at the previous tick and the thrust it produces now.
    const double yaw = quat_to_euler(prev.q).yaw;
    rec.t.push_back(log.samples[k].t);
    rec.u.push_back(thrust_in_world(prev.cmd.roll_cmd, prev.cmd.pitch_cmd, yaw,
                                    prev.cmd.thrust).x());
    rec.y.push_back((quat_to_rotmat(a.q) * Vec3(0.0, 0.0, prev.cmd.thrust)).x());
  }
  return rec;
}

StepRecord estimator_force_step(const MavParams &mav, EstimatorKind est, double force,
                                double duration) {
  Scenario sc = single_agent_scenario(mav, est);
  sc.duration = duration;
  sc.force_agent = 0;
  sc.force_time = 1.0;
  sc.force = Vec3(force, 0.0, 0.0);
  const RunLog log = run_scenario(sc);
  if (log.diverged)
    throw UnstableSystem("force step diverged");
  StepRecord rec;
  for (const LogSample &s : log.samples) {
    rec.t.push_back(s.t);
    rec.u.push_back(s.t >= sc.force_time - 1e-12 ? force : 0.0);
    rec.y.push_back(s.agents[0].F_raw.x());
  }
  return rec;
}

std::vector<double> identification_grid() { return log_grid(0.3, 30.0, 40); }

IdentifiedWeights identify_weights(const MavParams &mav, EstimatorKind est,
                                   const std::vector<double> &omega) {
  IdentifiedWeights out;
  out.omega = omega;
  {
    const FrequencyResponse act = step_frequency_response(position_chain_step(mav), omega);
    const FrequencyResponse nom = sample(TransferFunction::first_order_lag(mav.tau_att), omega);
    out.pos_error = relative_error(nom, act);
    out.w_pos = fit_relative_error(omega, out.pos_error);
  }
  {
    const FrequencyResponse act =
        step_frequency_response(estimator_force_step(mav, est), omega);
    const FrequencyResponse nom = sample(TransferFunction::first_order_lag(mav.tau_est), omega);
    out.est_error = relative_error(nom, act);
    out.w_est = fit_relative_error(omega, out.est_error);
  }
  return out;
}

double fit_time_constant(const std::vector<double> &t, const std::vector<double> &y,
                         double t0, double final_value) {
  if (t.size() != y.size() || t.empty())
    throw DimensionMismatch("time constant fit: length mismatch");
  auto cost = [&](double tau) {
    double c = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] < t0)
        continue;
      const double model = final_value * (1.0 - std::exp(-(t[k] - t0) / tau));
      c += (y[k] - model) * (y[k] - model);
    }
    return c;
  };
  // Golden-section search on log tau.
  double a = std::log(1e-3), b = std::log(10.0);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = cost(std::exp(c)), fd = cost(std::exp(d));
  for (int it = 0; it < 100; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = cost(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = cost(std::exp(d));
    }
  }
  return std::exp(0.5 * (a + b));
}

} // namespace cotrans
