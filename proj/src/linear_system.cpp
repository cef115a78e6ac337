#include "cotrans/linear_system.hpp"

#include "cotrans/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace cotrans {

LinearSystem::LinearSystem(MatrixXd A_, MatrixXd B_, MatrixXd C_, MatrixXd D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
  validate();
}

void LinearSystem::validate() const {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n || C.rows() != D.rows() ||
      B.cols() != D.cols())
    throw DimensionMismatch("inconsistent state-space dimensions");
  if (!inputs.empty() && static_cast<Eigen::Index>(inputs.size()) != D.cols())
    throw DimensionMismatch("input label count mismatch");
  if (!outputs.empty() && static_cast<Eigen::Index>(outputs.size()) != D.rows())
    throw DimensionMismatch("output label count mismatch");
}

MatrixXcd LinearSystem::eval(cd s) const {
  MatrixXcd G = D.cast<cd>();
  if (nx() == 0)
    return G;
  MatrixXcd M = -A.cast<cd>();
  M.diagonal().array() += s;
  G += C.cast<cd>() * M.partialPivLu().solve(B.cast<cd>());
  return G;
}

MatrixXcd LinearSystem::freq_response(double omega) const {
  return eval(cd(0.0, omega));
}

MatrixXd LinearSystem::dc_gain() const {
  if (nx() == 0)
    return D;
  return D - C * A.fullPivLu().solve(B);
}

VectorXcd LinearSystem::poles() const {
  if (nx() == 0)
    return {};
  return Eigen::EigenSolver<MatrixXd>(A, false).eigenvalues();
}

double LinearSystem::spectral_abscissa() const {
  if (nx() == 0)
    return -INFINITY;
  return poles().real().maxCoeff();
}

bool LinearSystem::is_hurwitz(double margin) const {
  return spectral_abscissa() < -margin;
}

int LinearSystem::input_index(const std::string &name) const {
  auto it = std::find(inputs.begin(), inputs.end(), name);
  if (it == inputs.end())
    throw ChannelMismatch("no input channel '" + name + "'");
  return static_cast<int>(it - inputs.begin());
}

int LinearSystem::output_index(const std::string &name) const {
  auto it = std::find(outputs.begin(), outputs.end(), name);
  if (it == outputs.end())
    throw ChannelMismatch("no output channel '" + name + "'");
  return static_cast<int>(it - outputs.begin());
}

LinearSystem LinearSystem::gain(const MatrixXd &K) {
  return LinearSystem(MatrixXd(0, 0), MatrixXd(0, K.cols()), MatrixXd(K.rows(), 0), K);
}

LinearSystem LinearSystem::tf(const std::vector<double> &num,
                              const std::vector<double> &den) {
  if (den.empty() || den.front() == 0.0 || num.size() > den.size())
    throw DimensionMismatch("transfer function must be proper");
  const int n = static_cast<int>(den.size()) - 1;
  std::vector<double> b(n + 1, 0.0);
  std::copy(num.begin(), num.end(), b.begin() + (n + 1 - num.size()));
  const double a0 = den.front();
  std::vector<double> a(n + 1), bn(n + 1);
  for (int i = 0; i <= n; ++i) {
    a[i] = den[i] / a0;
    bn[i] = b[i] / a0;
  }
  // Controllable canonical form.
  MatrixXd A = MatrixXd::Zero(n, n), B = MatrixXd::Zero(n, 1), C(1, n), D(1, 1);
  for (int i = 0; i + 1 < n; ++i)
    A(i, i + 1) = 1.0;
  for (int i = 0; i < n; ++i) {
    A(n - 1, i) = -a[n - i];
    C(0, i) = bn[n - i] - a[n - i] * bn[0];
  }
  if (n > 0)
    B(n - 1, 0) = 1.0;
  D(0, 0) = bn[0];
  return LinearSystem(A, B, C, D);
}

LinearSystem series(const LinearSystem &G1, const LinearSystem &G2) {
  if (G2.nu() != G1.ny())
    throw DimensionMismatch("series: G2 inputs must equal G1 outputs");
  const auto n1 = G1.nx(), n2 = G2.nx();
  MatrixXd A = MatrixXd::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = G1.A;
  A.bottomLeftCorner(n2, n1) = G2.B * G1.C;
  A.bottomRightCorner(n2, n2) = G2.A;
  MatrixXd B(n1 + n2, G1.nu());
  B << G1.B, G2.B * G1.D;
  MatrixXd C(G2.ny(), n1 + n2);
  C << G2.D * G1.C, G2.C;
  LinearSystem out(A, B, C, G2.D * G1.D);
  out.inputs = G1.inputs;
  out.outputs = G2.outputs;
  return out;
}

LinearSystem parallel(const LinearSystem &G1, const LinearSystem &G2) {
  if (G1.nu() != G2.nu() || G1.ny() != G2.ny())
    throw DimensionMismatch("parallel: channel counts differ");
  const auto n1 = G1.nx(), n2 = G2.nx();
  MatrixXd A = MatrixXd::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = G1.A;
  A.bottomRightCorner(n2, n2) = G2.A;
  MatrixXd B(n1 + n2, G1.nu());
  B << G1.B, G2.B;
  MatrixXd C(G1.ny(), n1 + n2);
  C << G1.C, G2.C;
  return LinearSystem(A, B, C, G1.D + G2.D);
}

LinearSystem append(const LinearSystem &G1, const LinearSystem &G2) {
  const auto n1 = G1.nx(), n2 = G2.nx();
  MatrixXd A = MatrixXd::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = G1.A;
  A.bottomRightCorner(n2, n2) = G2.A;
  MatrixXd B = MatrixXd::Zero(n1 + n2, G1.nu() + G2.nu());
  B.topLeftCorner(n1, G1.nu()) = G1.B;
  B.bottomRightCorner(n2, G2.nu()) = G2.B;
  MatrixXd C = MatrixXd::Zero(G1.ny() + G2.ny(), n1 + n2);
  C.topLeftCorner(G1.ny(), n1) = G1.C;
  C.bottomRightCorner(G2.ny(), n2) = G2.C;
  MatrixXd D = MatrixXd::Zero(G1.ny() + G2.ny(), G1.nu() + G2.nu());
  D.topLeftCorner(G1.ny(), G1.nu()) = G1.D;
  D.bottomRightCorner(G2.ny(), G2.nu()) = G2.D;
  LinearSystem out(A, B, C, D);
  if (!G1.inputs.empty() && !G2.inputs.empty()) {
    out.inputs = G1.inputs;
    out.inputs.insert(out.inputs.end(), G2.inputs.begin(), G2.inputs.end());
  }
  if (!G1.outputs.empty() && !G2.outputs.empty()) {
    out.outputs = G1.outputs;
    out.outputs.insert(out.outputs.end(), G2.outputs.begin(), G2.outputs.end());
  }
  return out;
}

LinearSystem select(const LinearSystem &G, const std::vector<int> &out,
                    const std::vector<int> &in) {
  MatrixXd B(G.nx(), in.size()), C(out.size(), G.nx()), D(out.size(), in.size());
  for (std::size_t j = 0; j < in.size(); ++j) {
    if (in[j] < 0 || in[j] >= G.nu())
      throw ChannelMismatch("select: input index out of range");
    B.col(j) = G.B.col(in[j]);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0 || out[i] >= G.ny())
      throw ChannelMismatch("select: output index out of range");
    C.row(i) = G.C.row(out[i]);
    for (std::size_t j = 0; j < in.size(); ++j)
      D(i, j) = G.D(out[i], in[j]);
  }
  LinearSystem r(G.A, B, C, D);
  if (!G.inputs.empty())
    for (int j : in)
      r.inputs.push_back(G.inputs[j]);
  if (!G.outputs.empty())
    for (int i : out)
      r.outputs.push_back(G.outputs[i]);
  return r;
}

MatrixXcd lft_upper(const MatrixXcd &N, const MatrixXcd &Delta) {
  const auto p = Delta.cols();  // Delta maps N outputs (p) to N inputs (q)
  const auto q = Delta.rows();
  if (p > N.rows() || q > N.cols())
    throw DimensionMismatch("lft_upper: Delta larger than N");
  const MatrixXcd N11 = N.topLeftCorner(p, q);
  const MatrixXcd N12 = N.topRightCorner(p, N.cols() - q);
  const MatrixXcd N21 = N.bottomLeftCorner(N.rows() - p, q);
  const MatrixXcd N22 = N.bottomRightCorner(N.rows() - p, N.cols() - q);
  MatrixXcd I = MatrixXcd::Identity(p, p);
  return N22 + N21 * Delta * (I - N11 * Delta).partialPivLu().solve(N12);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i)
    g[i] = std::pow(10.0, a + (b - a) * i / (n - 1));
  return g;
}

namespace {

double sigma_max(const MatrixXcd &M) {
  if (M.size() == 0)
    return 0.0;
  return Eigen::JacobiSVD<MatrixXcd>(M).singularValues()(0);
}

} // namespace

HinfResult hinf_norm(const LinearSystem &T, int grid_points) {
  if (T.nx() > 0 && !T.is_hurwitz())
    throw UnstableSystem("hinf_norm requires a stable system");
  double lo = 1e-3, hi = 1e2;
  if (T.nx() > 0) {
    const VectorXcd p = T.poles();
    const double pmin = p.cwiseAbs().minCoeff(), pmax = p.cwiseAbs().maxCoeff();
    lo = std::min(lo, 0.1 * pmin);
    hi = std::max(hi, 10.0 * pmax);
  }
  const auto grid = log_grid(lo, hi, grid_points);
  HinfResult best{sigma_max(T.freq_response(0.0)), 0.0};
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = sigma_max(T.freq_response(grid[i]));
    if (s > best.norm) {
      best = {s, grid[i]};
      arg = i;
    }
  }
  if (best.peak_frequency > 0.0) {
    // Golden-section search in log frequency between the neighbours.
    double a = std::log(grid[arg > 0 ? arg - 1 : 0]);
    double b = std::log(grid[std::min(arg + 1, grid.size() - 1)]);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [&](double x) { return sigma_max(T.freq_response(std::exp(x))); };
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60; ++it) {
      if (fc > fd) {
        b = d; d = c; fd = fc; c = b - r * (b - a); fc = f(c);
      } else {
        a = c; c = d; fc = fd; d = a + r * (b - a); fd = f(d);
      }
    }
    const double x = 0.5 * (a + b), fx = f(x);
    if (fx > best.norm)
      best = {fx, std::exp(x)};
  }
  return best;
}

} // namespace cotrans
