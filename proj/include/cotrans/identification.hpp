#pragma once

#include "cotrans/scenario.hpp"
#include "cotrans/weights.hpp"

#include <vector>

namespace cotrans {

struct StepRecord {
  std::vector<double> t, u, y;
};

// Empirical transfer function from a step experiment:
// G(jw) = sum dy_k exp(-jw t_k) / sum du_k exp(-jw t_k), with d the first
// difference. Valid once both signals have settled at the end of the record.
FrequencyResponse step_frequency_response(const StepRecord &rec,
                                          const std::vector<double> &omega);

// One agent carrying a negligible payload.
Scenario single_agent_scenario(const MavParams &mav, EstimatorKind est);

// Lateral commanded force (input) versus produced thrust force (output)
// during a position reference step along x.
StepRecord position_chain_step(const MavParams &mav, double step = 0.2,
                               double duration = 8.0);
// Applied external force (input) versus estimate (output) at hover.
StepRecord estimator_force_step(const MavParams &mav, EstimatorKind est,
                                double force = 1.0, double duration = 6.0);

struct IdentifiedWeights {
  std::vector<double> omega;
  TransferFunction w_pos;
  TransferFunction w_est;
  std::vector<double> pos_error;
  std::vector<double> est_error;
};

std::vector<double> identification_grid();
IdentifiedWeights identify_weights(const MavParams &mav, EstimatorKind est,
                                   const std::vector<double> &omega = identification_grid());

// Fitted first-order time constant of a unit-normalized step response
// starting at t0: least squares on 1 - exp(-(t - t0) / tau).
double fit_time_constant(const std::vector<double> &t, const std::vector<double> &y,
                         double t0, double final_value);

} // namespace cotrans
