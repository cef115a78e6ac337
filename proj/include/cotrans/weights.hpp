#pragma once

#include "cotrans/linear_system.hpp"

#include <vector>

namespace cotrans {

// SISO rational function, coefficients in descending powers of s.
struct TransferFunction {
  std::vector<double> num{0.0};
  std::vector<double> den{1.0};

  cd eval(cd s) const;
  cd at(double omega) const { return eval(cd(0.0, omega)); }
  double magnitude(double omega) const { return std::abs(at(omega)); }
  LinearSystem to_state_space() const { return LinearSystem::tf(num, den); }
  bool is_zero() const;

  static TransferFunction constant(double k) { return {{k}, {1.0}}; }
  static TransferFunction first_order_lag(double tau) { return {{1.0}, {tau, 1.0}}; }
};

struct FrequencyResponse {
  std::vector<double> omega;
  std::vector<cd> value;
};

FrequencyResponse sample(const TransferFunction &G, const std::vector<double> &omega);
FrequencyResponse sample(const LinearSystem &G, const std::vector<double> &omega,
                         int out = 0, int in = 0);

// Relative error |(G_actual - G_nom) / G_nom| per sample.
std::vector<double> relative_error(const FrequencyResponse &nominal,
                                   const FrequencyResponse &actual);

struct WeightFitOptions {
  int max_order = 2;
  double cap = 10.0;          // relative errors above this are rejected
  double zero_tolerance = 1e-9;
};

// Stable, minimum-phase weight w(s) = k ((s + z)/(s + p))^order whose
// magnitude covers the relative error at every sample.
TransferFunction fit_relative_error(const std::vector<double> &omega,
                                    const std::vector<double> &rel_err,
                                    const WeightFitOptions &opt = {});
TransferFunction fit_uncertainty_weight(const LinearSystem &G_nom,
                                        const FrequencyResponse &G_actual,
                                        const WeightFitOptions &opt = {});

struct PerformanceWeightConfig {
  double gain = 1.0 / 18.0;      // inverse of the admissible lateral force, 1/N
  double band_lo = 0.01;         // rad/s
  double band_hi = 0.067;        // rad/s
  double zeta_num = 0.25;
  double zeta_den = 2.0;

  TransferFunction transfer_function() const;
};
cd performance_weight(double omega, const PerformanceWeightConfig &cfg = {});

} // namespace cotrans
