#include "cotrans/errors.hpp"
#include "cotrans/linear_system.hpp"
#include "cotrans/ssv.hpp"
#include "cotrans/weights.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace cotrans;

namespace {

double sigma_max(const MatrixXcd &M) {
  return Eigen::JacobiSVD<MatrixXcd>(M).singularValues()(0);
}

double spectral_radius(const MatrixXcd &M) {
  return Eigen::ComplexEigenSolver<MatrixXcd>(M).eigenvalues().cwiseAbs().maxCoeff();
}

MatrixXcd random_complex(std::mt19937_64 &rng, int r, int c) {
  std::normal_distribution<double> n;
  MatrixXcd M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      M(i, j) = cd(n(rng), n(rng));
  return M;
}

// Diagonal scaling with one positive scalar per group of the structure.
Eigen::VectorXd structured_scaling(std::mt19937_64 &rng, const DeltaStructure &s) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> d;
  for (const auto &b : s) {
    if (b.kind == BlockKind::ComplexFull) {
      const double v = std::exp(u(rng));
      for (int i = 0; i < b.rows; ++i)
        d.push_back(v);
    } else {
      for (int i = 0; i < b.rows; ++i)
        d.push_back(std::exp(u(rng)));
    }
  }
  return Eigen::Map<Eigen::VectorXd>(d.data(), d.size());
}

const DeltaStructure kMixed{{BlockKind::ComplexScalar, 2, 2},
                            {BlockKind::ComplexFull, 3, 3},
                            {BlockKind::ComplexFull, 1, 1},
                            {BlockKind::RealScalar, 2, 2}};

} // namespace

TEST(LinearSystem, FirstOrderLagResponse) {
  const LinearSystem G = LinearSystem::tf({1.0}, {0.2, 1.0});
  for (double w : {0.1, 5.0, 50.0}) {
    const cd ref = 1.0 / cd(1.0, 0.2 * w);
    EXPECT_LT(std::abs(G.freq_response(w)(0, 0) - ref), 1e-14);
  }
  EXPECT_NEAR(G.dc_gain()(0, 0), 1.0, 1e-14);
  EXPECT_TRUE(G.is_hurwitz());
  EXPECT_NEAR(G.poles()[0].real(), -5.0, 1e-12);
}

TEST(LinearSystem, BiproperTransferFunction) {
  const LinearSystem G = LinearSystem::tf({2.0, 3.0}, {1.0, 4.0});
  for (double w : {0.0, 1.0, 100.0}) {
    const cd s(0.0, w);
    EXPECT_LT(std::abs(G.freq_response(w)(0, 0) - (2.0 * s + 3.0) / (s + 4.0)), 1e-13);
  }
  EXPECT_THROW(LinearSystem::tf({1.0, 0.0, 0.0}, {1.0, 1.0}), DimensionMismatch);
}

TEST(LinearSystem, SeriesParallelAppend) {
  const LinearSystem a = LinearSystem::tf({1.0}, {1.0, 1.0});
  const LinearSystem b = LinearSystem::tf({3.0}, {0.5, 1.0});
  for (double w : {0.3, 3.0}) {
    const cd ga = a.freq_response(w)(0, 0), gb = b.freq_response(w)(0, 0);
    EXPECT_LT(std::abs(series(a, b).freq_response(w)(0, 0) - ga * gb), 1e-13);
    EXPECT_LT(std::abs(parallel(a, b).freq_response(w)(0, 0) - (ga + gb)), 1e-13);
    const MatrixXcd G = append(a, b).freq_response(w);
    EXPECT_LT(std::abs(G(0, 1)) + std::abs(G(1, 0)), 1e-15);
    EXPECT_LT(std::abs(G(1, 1) - gb), 1e-13);
  }
  EXPECT_THROW(series(append(a, b), a), DimensionMismatch);
}

TEST(LinearSystem, ChannelLookup) {
  LinearSystem G = LinearSystem::gain(MatrixXd::Identity(2, 2));
  G.inputs = {"a", "b"};
  G.outputs = {"c", "d"};
  EXPECT_EQ(G.input_index("b"), 1);
  EXPECT_EQ(G.output_index("c"), 0);
  EXPECT_THROW(G.input_index("z"), ChannelMismatch);
  const LinearSystem s = select(G, {1}, {1});
  EXPECT_EQ(s.outputs, std::vector<std::string>{"d"});
  EXPECT_THROW(select(G, {2}, {0}), ChannelMismatch);
}

TEST(Lft, ZeroDeltaGivesLowerRightBlock) {
  std::mt19937_64 rng(1);
  const MatrixXcd N = random_complex(rng, 5, 5);
  const MatrixXcd F = lft_upper(N, MatrixXcd::Zero(3, 3));
  EXPECT_LT((F - N.bottomRightCorner(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lft, ScalarFeedbackMatchesClosedForm) {
  // x' = -a x + d + w, e = z = x, closed with d = delta e.
  const double a = 2.0, delta = 0.7;
  for (double w : {0.01, 1.0, 30.0}) {
    const cd g = 1.0 / cd(a, w);
    MatrixXcd N(2, 2);
    N << g, g, g, g;
    const MatrixXcd D = MatrixXcd::Constant(1, 1, delta);
    EXPECT_LT(std::abs(lft_upper(N, D)(0, 0) - 1.0 / cd(a - delta, w)), 1e-14);
  }
}

TEST(Hinf, LagGainAndResonance) {
  EXPECT_NEAR(hinf_norm(LinearSystem::tf({1.0}, {0.3, 1.0})).norm, 1.0, 1e-6);
  EXPECT_NEAR(hinf_norm(LinearSystem::gain(MatrixXd::Constant(1, 1, -2.5))).norm, 2.5, 1e-12);
  const double z = 0.05, wn = 3.0;
  const HinfResult r = hinf_norm(LinearSystem::tf({wn * wn}, {1.0, 2 * z * wn, wn * wn}));
  EXPECT_NEAR(r.norm, 1.0 / (2 * z * std::sqrt(1 - z * z)), 0.01 * r.norm);
  EXPECT_NEAR(r.peak_frequency, wn * std::sqrt(1 - 2 * z * z), 0.01 * wn);
  EXPECT_THROW(hinf_norm(LinearSystem::tf({1.0}, {1.0, -1.0})), UnstableSystem);
}

TEST(LogGrid, EndpointsAndRatio) {
  const auto g = log_grid(1e-3, 1e2, 200);
  ASSERT_EQ(g.size(), 200u);
  EXPECT_NEAR(g.front(), 1e-3, 1e-18);
  EXPECT_NEAR(g.back(), 1e2, 1e-10);
  EXPECT_NEAR(g[1] / g[0], g[100] / g[99], 1e-12);
}

TEST(Ssv, FullBlockIsMaxSingularValue) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const MatrixXcd M = random_complex(rng, 4, 4);
    const MuBound b = ssv_upper_bound(M, {{BlockKind::ComplexFull, 4, 4}});
    EXPECT_NEAR(b.mu, sigma_max(M), 1e-12 * sigma_max(M));
  }
}

TEST(Ssv, DiagonalMatrixWithScalarBlocks) {
  MatrixXcd M = MatrixXcd::Zero(3, 3);
  M.diagonal() << cd(0.5, 0.1), cd(-2.0, 0.0), cd(0.0, 1.0);
  const DeltaStructure s{{BlockKind::ComplexScalar, 1, 1},
                         {BlockKind::ComplexScalar, 1, 1},
                         {BlockKind::ComplexScalar, 1, 1}};
  EXPECT_NEAR(ssv_upper_bound(M, s).mu, 2.0, 1e-6);
}

TEST(Ssv, BoundedBySpectralRadiusAndMaxSingularValue) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const MatrixXcd M = random_complex(rng, 8, 8);
    const double mu = ssv_upper_bound(M, kMixed).mu;
    EXPECT_GE(mu, spectral_radius(M) * (1 - 1e-9));
    EXPECT_LE(mu, sigma_max(M) * (1 + 1e-9));
  }
}

TEST(Ssv, InvariantUnderCommutingScaling) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const MatrixXcd M = random_complex(rng, 8, 8);
    const Eigen::VectorXd d = structured_scaling(rng, kMixed);
    const MatrixXcd S = d.cast<cd>().asDiagonal() * M * d.cwiseInverse().cast<cd>().asDiagonal();
    const double a = ssv_upper_bound(M, kMixed, nullptr, 400).mu;
    const double b = ssv_upper_bound(S, kMixed, nullptr, 400).mu;
    EXPECT_NEAR(a, b, 1e-6 * a);
  }
}

TEST(Ssv, WarmStartDoesNotWorsen) {
  std::mt19937_64 rng(9);
  const MatrixXcd M = random_complex(rng, 8, 8);
  const MuBound cold = ssv_upper_bound(M, kMixed);
  const MuBound warm = ssv_upper_bound(M, kMixed, &cold.d, 5);
  EXPECT_LE(warm.mu, cold.mu * (1 + 1e-12));
  EXPECT_THROW(ssv_upper_bound(M, {{BlockKind::ComplexFull, 3, 3}}), DimensionMismatch);
}

TEST(Ssv, SmallGainDestabilizingPerturbationExists) {
  // For a single full block the destabilizing Delta has norm 1/mu.
  std::mt19937_64 rng(11);
  const MatrixXcd M = random_complex(rng, 3, 3);
  Eigen::JacobiSVD<MatrixXcd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s = svd.singularValues()(0);
  const MatrixXcd Delta = svd.matrixV().col(0) * svd.matrixU().col(0).adjoint() / s;
  const MatrixXcd I = MatrixXcd::Identity(3, 3);
  EXPECT_LT(std::abs((I - M * Delta).determinant()), 1e-12);
  EXPECT_NEAR(sigma_max(Delta), 1.0 / ssv_upper_bound(M, {{BlockKind::ComplexFull, 3, 3}}).mu,
              1e-12);
}

TEST(BlockDiagonal, PlacesBlocks) {
  const DeltaStructure s{{BlockKind::ComplexFull, 1, 2}, {BlockKind::ComplexScalar, 1, 1}};
  MatrixXcd a(2, 1), b(1, 1);
  a << cd(1, 0), cd(2, 0);
  b << cd(3, 0);
  const MatrixXcd D = block_diagonal(s, {a, b});
  ASSERT_EQ(D.rows(), 3);
  ASSERT_EQ(D.cols(), 2);
  EXPECT_EQ(D(1, 0), cd(2, 0));
  EXPECT_EQ(D(2, 1), cd(3, 0));
  EXPECT_EQ(D(0, 1), cd(0, 0));
}

TEST(AssembleNDelta, ZeroDeltaRecoversNominalAndFeedbackCloses) {
  // x' = -2 x + d + w; e = x; z = x.
  LinearSystem P(MatrixXd::Constant(1, 1, -2.0), (MatrixXd(1, 2) << 1, 1).finished(),
                 (MatrixXd(2, 1) << 1, 1).finished(), MatrixXd::Zero(2, 2));
  P.inputs = {"d", "w"};
  P.outputs = {"e", "z"};
  const UncertaintyBlock blk{"gain", BlockKind::RealScalar, {"e"}, {"d"},
                             TransferFunction::constant(0.5)};
  const PerformanceChannels perf{{"z"}, {"w"}, TransferFunction::constant(1.0)};
  const NDelta N = assemble_n_delta(P, {blk}, &perf);
  EXPECT_EQ(N.structure.size(), 2u);
  EXPECT_EQ(N.stability_structure().size(), 1u);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lw(-3.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const double w = std::pow(10.0, lw(rng));
    const MatrixXcd R = N.response(w);
    const cd nominal = 1.0 / cd(2.0, w);
    EXPECT_LT(std::abs(lft_upper(R, MatrixXcd::Zero(1, 1))(0, 0) - nominal), 1e-9);
    // delta = 0.8 with weight 0.5 moves the pole to -2 + 0.4.
    EXPECT_LT(std::abs(lft_upper(R, MatrixXcd::Constant(1, 1, 0.8))(0, 0) - 1.0 / cd(1.6, w)),
              1e-12);
    EXPECT_LT((N.to_linear_system().freq_response(w) - R).cwiseAbs().maxCoeff(), 1e-12);
  }
  const UncertaintyBlock bad{"bad", BlockKind::ComplexFull, {"nope"}, {"d"}, {}};
  EXPECT_THROW(assemble_n_delta(P, {bad}), ChannelMismatch);
}

TEST(PerformanceWeight, BandIsAttenuated) {
  const PerformanceWeightConfig cfg;
  const double in_band = std::abs(performance_weight(0.025, cfg));
  EXPECT_LT(in_band, std::abs(performance_weight(0.001, cfg)));
  EXPECT_LT(in_band, std::abs(performance_weight(1.0, cfg)));
  const TransferFunction tf = cfg.transfer_function();
  EXPECT_LE(tf.num.size(), tf.den.size());
  EXPECT_TRUE(tf.to_state_space().is_hurwitz());
  EXPECT_TRUE(std::isfinite(tf.magnitude(1e6)));
}

TEST(WeightFit, IdenticalResponseGivesNegligibleWeight) {
  const auto omega = log_grid(1e-3, 1e2, 200);
  const LinearSystem G = LinearSystem::tf({1.0}, {0.2, 1.0});
  const TransferFunction w = fit_uncertainty_weight(G, sample(G, omega));
  for (double x : omega)
    EXPECT_LE(w.magnitude(x), 0.01);
}

TEST(WeightFit, SlowerLagEnvelope) {
  const double tau = 0.2;
  const auto omega = log_grid(1e-3, 1e2, 200);
  const LinearSystem nom = LinearSystem::tf({1.0}, {tau, 1.0});
  const TransferFunction actual{{1.0}, {2 * tau, 1.0}};
  const TransferFunction w = fit_uncertainty_weight(nom, sample(actual, omega));
  EXPECT_TRUE(w.to_state_space().is_hurwitz());
  for (double x : omega) {
    // Analytic relative error |tau s / (2 tau s + 1)|.
    const cd s(0.0, x);
    const double e = std::abs(tau * s / (2.0 * tau * s + 1.0));
    EXPECT_GE(w.magnitude(x), e * (1 - 1e-12)) << x;
    EXPECT_LE(w.magnitude(x), e * std::sqrt(2.0)) << x;
  }
}

TEST(WeightFit, CoversSampledErrorAndRejectsHugeError) {
  const auto omega = log_grid(1e-3, 1e2, 120);
  std::vector<double> e;
  for (double x : omega)
    e.push_back(0.05 + 0.4 * x * x / (x * x + 4.0) + 0.02 * std::sin(3 * std::log(x)));
  const TransferFunction w = fit_relative_error(omega, e);
  for (std::size_t i = 0; i < omega.size(); ++i)
    EXPECT_GE(w.magnitude(omega[i]), e[i] * (1 - 1e-12));
  std::vector<double> big(omega.size(), 50.0);
  EXPECT_THROW(fit_relative_error(omega, big), FitInfeasible);
}
