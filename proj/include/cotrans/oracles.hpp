#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace cotrans {

struct OracleResult {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct OracleReport {
  std::vector<OracleResult> results;
  double max_jacobian_error = 0.0;

  bool passed() const;
  int failures() const;
  std::string text() const;
};

struct OracleOptions {
  int jacobian_states = 100;
  int roundtrips = 1000;
  int delta_samples = 50;
  std::uint64_t seed = 1;
};

// Brute-force checks of the library against independent references:
// finite differences, analytic solutions and point-mass sums.
OracleReport oracle_suite(const OracleOptions &opts = {});

// Largest column-wise relative deviation between two Jacobians, with the
// column norm floored at one.
double jacobian_error(const Eigen::MatrixXd &J, const Eigen::MatrixXd &reference);

} // namespace cotrans
