#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>
#include <vector>

namespace cotrans {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct LinearSystem {
  MatrixXd A, B, C, D;
  std::vector<std::string> inputs, outputs;

  LinearSystem() = default;
  LinearSystem(MatrixXd A_, MatrixXd B_, MatrixXd C_, MatrixXd D_);

  Eigen::Index nx() const { return A.rows(); }
  Eigen::Index nu() const { return D.cols(); }
  Eigen::Index ny() const { return D.rows(); }

  void validate() const;
  MatrixXcd freq_response(double omega) const;
  MatrixXcd eval(cd s) const;
  MatrixXd dc_gain() const;
  VectorXcd poles() const;
  bool is_hurwitz(double margin = 0.0) const;
  double spectral_abscissa() const;

  int input_index(const std::string &name) const;
  int output_index(const std::string &name) const;

  static LinearSystem gain(const MatrixXd &K);
  // SISO rational num(s)/den(s), coefficients in descending powers, proper.
  static LinearSystem tf(const std::vector<double> &num, const std::vector<double> &den);
};

// y = G2(G1(u)).
LinearSystem series(const LinearSystem &G1, const LinearSystem &G2);
LinearSystem parallel(const LinearSystem &G1, const LinearSystem &G2);
// Block diagonal stacking of inputs and outputs.
LinearSystem append(const LinearSystem &G1, const LinearSystem &G2);
// Rows and columns picked by index.
LinearSystem select(const LinearSystem &G, const std::vector<int> &out,
                    const std::vector<int> &in);

// Upper LFT F_u(N, Delta) = N22 + N21 Delta (I - N11 Delta)^-1 N12 where
// N11 is the leading n_delta_out x n_delta_in block.
MatrixXcd lft_upper(const MatrixXcd &N, const MatrixXcd &Delta);

// Peak of the largest singular value on a log grid with local refinement.
struct HinfResult {
  double norm = 0.0;
  double peak_frequency = 0.0;
};
HinfResult hinf_norm(const LinearSystem &T, int grid_points = 400);

std::vector<double> log_grid(double lo, double hi, int n);

} // namespace cotrans
