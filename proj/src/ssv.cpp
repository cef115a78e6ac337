#include "cotrans/ssv.hpp"

#include "cotrans/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace cotrans {

MatrixXcd NDelta::response(double omega) const {
  MatrixXcd P = plant.freq_response(omega);
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    P.row(i) *= row_weights[i].at(omega);
  return P;
}

LinearSystem NDelta::to_linear_system() const {
  LinearSystem W = row_weights[0].to_state_space();
  for (std::size_t i = 1; i < row_weights.size(); ++i)
    W = append(W, row_weights[i].to_state_space());
  W.inputs = plant.outputs;
  W.outputs = plant.outputs;
  return series(plant, W);
}

DeltaStructure NDelta::stability_structure() const {
  DeltaStructure s = structure;
  if (has_performance)
    s.pop_back();
  return s;
}

NDelta assemble_n_delta(const LinearSystem &plant,
                        const std::vector<UncertaintyBlock> &blocks,
                        const PerformanceChannels *perf) {
  std::vector<int> out, in;
  NDelta N;
  for (const auto &b : blocks) {
    if (b.outputs.empty() || b.inputs.empty())
      throw ChannelMismatch("uncertainty block '" + b.name + "' has no channels");
    if (b.kind != BlockKind::ComplexFull && b.outputs.size() != b.inputs.size())
      throw ChannelMismatch("scalar block '" + b.name + "' must be square");
    for (const auto &o : b.outputs) {
      out.push_back(plant.output_index(o));
      N.row_weights.push_back(b.weight);
    }
    for (const auto &i : b.inputs)
      in.push_back(plant.input_index(i));
    N.structure.push_back({b.kind, static_cast<int>(b.outputs.size()),
                           static_cast<int>(b.inputs.size())});
  }
  N.n_delta_rows = static_cast<int>(out.size());
  N.n_delta_cols = static_cast<int>(in.size());
  if (perf) {
    if (perf->outputs.empty() || perf->inputs.empty())
      throw ChannelMismatch("performance channels are empty");
    for (const auto &o : perf->outputs) {
      out.push_back(plant.output_index(o));
      N.row_weights.push_back(perf->weight);
    }
    for (const auto &i : perf->inputs)
      in.push_back(plant.input_index(i));
    N.structure.push_back({BlockKind::ComplexFull, static_cast<int>(perf->outputs.size()),
                           static_cast<int>(perf->inputs.size())});
    N.has_performance = true;
  }
  N.plant = select(plant, out, in);
  return N;
}

MatrixXcd block_diagonal(const DeltaStructure &structure,
                         const std::vector<MatrixXcd> &blocks) {
  if (blocks.size() != structure.size())
    throw DimensionMismatch("block_diagonal: block count mismatch");
  int r = 0, c = 0;
  for (const auto &s : structure) {
    r += s.cols;
    c += s.rows;
  }
  MatrixXcd D = MatrixXcd::Zero(r, c);
  r = c = 0;
  for (std::size_t k = 0; k < structure.size(); ++k) {
    const auto &s = structure[k];
    if (blocks[k].rows() != s.cols || blocks[k].cols() != s.rows)
      throw DimensionMismatch("block_diagonal: block shape mismatch");
    D.block(r, c, s.cols, s.rows) = blocks[k];
    r += s.cols;
    c += s.rows;
  }
  return D;
}

namespace {

// A scaling group: N rows and N columns sharing one scalar d.
struct Group {
  std::vector<int> rows, cols;
};

std::vector<Group> make_groups(const DeltaStructure &structure) {
  std::vector<Group> g;
  int r = 0, c = 0;
  for (const auto &s : structure) {
    if (s.kind == BlockKind::ComplexFull) {
      Group grp;
      for (int i = 0; i < s.rows; ++i)
        grp.rows.push_back(r + i);
      for (int j = 0; j < s.cols; ++j)
        grp.cols.push_back(c + j);
      g.push_back(grp);
    } else {
      // Repeated scalar: any diagonal D commutes, one scalar per channel.
      for (int i = 0; i < s.rows; ++i)
        g.push_back({{r + i}, {c + i}});
    }
    r += s.rows;
    c += s.cols;
  }
  return g;
}

struct Top {
  double s;
  VectorXcd u, v;
};

Top top_singular(const MatrixXcd &M, const std::vector<Group> &G,
                 const std::vector<double> &d) {
  MatrixXcd S = M;
  for (std::size_t a = 0; a < G.size(); ++a) {
    for (int r : G[a].rows)
      S.row(r) *= d[a];
    for (int c : G[a].cols)
      S.col(c) /= d[a];
  }
  // Dominant singular triplet from the smaller Gram matrix.
  Top t;
  if (S.cols() <= S.rows()) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(S.adjoint() * S);
    const Eigen::Index k = S.cols() - 1;
    t.s = std::sqrt(std::max(es.eigenvalues()(k), 0.0));
    t.v = es.eigenvectors().col(k);
    t.u = t.s > 0.0 ? VectorXcd(S * t.v / t.s) : VectorXcd::Zero(S.rows());
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(S * S.adjoint());
    const Eigen::Index k = S.rows() - 1;
    t.s = std::sqrt(std::max(es.eigenvalues()(k), 0.0));
    t.u = es.eigenvectors().col(k);
    t.v = t.s > 0.0 ? VectorXcd(S.adjoint() * t.u / t.s) : VectorXcd::Zero(S.cols());
  }
  return t;
}

std::vector<double> perron_init(const MatrixXcd &M, const std::vector<Group> &G) {
  const int K = static_cast<int>(G.size());
  MatrixXd B(K, K);
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b) {
      MatrixXcd sub(G[a].rows.size(), G[b].cols.size());
      for (std::size_t i = 0; i < G[a].rows.size(); ++i)
        for (std::size_t j = 0; j < G[b].cols.size(); ++j)
          sub(i, j) = M(G[a].rows[i], G[b].cols[j]);
      B(a, b) = Eigen::JacobiSVD<MatrixXcd>(sub).singularValues()(0) + 1e-300;
    }
  auto perron = [](const MatrixXd &X) {
    Eigen::EigenSolver<MatrixXd> es(X);
    Eigen::Index k;
    es.eigenvalues().real().maxCoeff(&k);
    return es.eigenvectors().col(k).real().cwiseAbs().eval();
  };
  const VectorXd x = perron(B), y = perron(B.transpose());
  std::vector<double> d(K);
  // Minimizing the scaled block-norm matrix uses d_a = sqrt(y_a / x_a).
  for (int a = 0; a < K; ++a)
    d[a] = std::sqrt((y[a] + 1e-12) / (x[a] + 1e-12));
  return d;
}

} // namespace

MuBound ssv_upper_bound(const MatrixXcd &M, const DeltaStructure &structure,
                        const std::vector<double> *warm, int iterations) {
  int rows = 0, cols = 0;
  for (const auto &s : structure) {
    rows += s.rows;
    cols += s.cols;
  }
  if (rows != M.rows() || cols != M.cols())
    throw DimensionMismatch("ssv: structure does not match matrix size");
  const auto G = make_groups(structure);
  if (G.size() == 1) {
    return {Eigen::JacobiSVD<MatrixXcd>(M).singularValues()(0), {1.0}};
  }

  const bool warm_ok = warm && warm->size() == G.size();
  std::vector<double> d = warm_ok ? *warm : perron_init(M, G);
  Top t = top_singular(M, G, d);

  double step = 1.0;
  for (int it = 0; it < iterations; ++it) {
    // d sigma / d log d_a = sigma (|u_a|^2 - |v_a|^2).
    std::vector<double> grad(G.size());
    double gnorm = 0.0;
    for (std::size_t a = 0; a < G.size(); ++a) {
      double gu = 0.0, gv = 0.0;
      for (int r : G[a].rows)
        gu += std::norm(t.u[r]);
      for (int c : G[a].cols)
        gv += std::norm(t.v[c]);
      grad[a] = gu - gv;
      gnorm += grad[a] * grad[a];
    }
    if (std::sqrt(gnorm) < 1e-10)
      break;
    bool improved = false;
    while (step > 1e-4) {
      std::vector<double> dn(d);
      for (std::size_t a = 0; a < G.size(); ++a)
        dn[a] = d[a] * std::exp(-step * grad[a]);
      Top tn = top_singular(M, G, dn);
      if (tn.s < t.s * (1.0 - 1e-12)) {
        const double gain = (t.s - tn.s) / t.s;
        d = dn;
        t = tn;
        if (gain < 1e-7)
          break;
        step *= 2.0;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved)
      break;
  }
  // Normalize so the first group carries unit scaling.
  const double d0 = d[0];
  for (double &x : d)
    x /= d0;
  return {t.s, d};
}

MuPeak mu_peak(const NDelta &N, const DeltaStructure &structure,
               const std::vector<double> &omega, int refine_steps, int iterations) {
  int rows = 0, cols = 0;
  for (const auto &s : structure) {
    rows += s.rows;
    cols += s.cols;
  }
  auto matrix_at = [&](double w) -> MatrixXcd {
    return N.response(w).topLeftCorner(rows, cols);
  };
  MuPeak peak;
  // Cheap warm-started pass: every value is already a valid upper bound.
  const int cheap = std::min(iterations, 3);
  std::vector<double> warm;
  std::vector<std::vector<double>> scalings;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    MuBound b = ssv_upper_bound(matrix_at(omega[i]), structure,
                                warm.empty() ? nullptr : &warm, cheap);
    warm = b.d;
    scalings.push_back(b.d);
    peak.mu_curve.push_back(b.mu);
  }
  // Tighten in decreasing order; a frequency whose cheap bound is below the
  // best tightened value cannot hold the peak.
  std::vector<std::size_t> order(omega.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return peak.mu_curve[a] > peak.mu_curve[b];
  });
  std::size_t arg = 0;
  bool first = true;
  for (std::size_t i : order) {
    if (!first && peak.mu_curve[i] <= peak.mu)
      break;
    MuBound b = ssv_upper_bound(matrix_at(omega[i]), structure, &scalings[i], iterations);
    if (b.mu < peak.mu_curve[i]) {
      peak.mu_curve[i] = b.mu;
      scalings[i] = b.d;
    }
    if (first || peak.mu_curve[i] > peak.mu) {
      peak.mu = peak.mu_curve[i];
      peak.omega = omega[i];
      arg = i;
    }
    first = false;
  }
  if (refine_steps > 0 && omega.size() > 2) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(omega[arg > 0 ? arg - 1 : 0]);
    double b = std::log(omega[std::min(arg + 1, omega.size() - 1)]);
    std::vector<double> seed = scalings[arg];
    auto f = [&](double x) {
      MuBound mb = ssv_upper_bound(matrix_at(std::exp(x)), structure, &seed, iterations);
      seed = mb.d;
      return mb.mu;
    };
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < refine_steps; ++it) {
      if (fc > fd) {
        b = d; d = c; fd = fc; c = b - r * (b - a); fc = f(c);
      } else {
        a = c; c = d; fc = fd; d = a + r * (b - a); fd = f(d);
      }
    }
    const double best = std::max(fc, fd);
    if (best > peak.mu) {
      peak.mu = best;
      peak.omega = std::exp(fc > fd ? c : d);
    }
  }
  return peak;
}

} // namespace cotrans
