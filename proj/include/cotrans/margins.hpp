#pragma once

#include "cotrans/analysis_model.hpp"
#include "cotrans/scenario.hpp"
#include "cotrans/ssv.hpp"
#include "cotrans/weights.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cotrans {

struct MarginConfig {
  double mass_weight = 0.5;     // payload mass interval [0.5, 1.5] x nominal
  double inertia_weight = 0.1;  // per diagonal entry
  TransferFunction w_pos = TransferFunction::constant(0.1);
  TransferFunction w_att{{0.05, 0.0}, {0.2, 1.0}};
  TransferFunction w_est = TransferFunction::constant(0.1);
  PerformanceWeightConfig performance;

  int freq_points = 200;
  double omega_lo = 1e-3;
  double omega_hi = 1e2;
  int refine_steps = 12;
  int iterations = 40;

  std::vector<double> frequency_grid() const;
  // Fewer frequencies and descent iterations for large sweeps.
  MarginConfig coarse() const;
  std::string describe() const;
};

// Weights identified from the nonlinear simulator.
MarginConfig default_margin_config(const MavParams &mav = MavParams(),
                                   EstimatorKind est = EstimatorKind::Ukf);

std::vector<UncertaintyBlock> uncertainty_blocks(const AnalysisModel &model,
                                                 const MarginConfig &cfg);
PerformanceChannels performance_channels(const AnalysisModel &model,
                                         const MarginConfig &cfg);

// Interconnection at one operating point, cyclic states removed.
struct OperatingInterconnection {
  NDelta N;
  double abscissa = 0.0;  // spectral abscissa of the reduced nominal loop
};
OperatingInterconnection interconnection(const AnalysisModel &model, OperatingPoint op,
                                         const MarginConfig &cfg);

struct MarginResult {
  double M = 0.0, C = 0.0;
  double rs_margin = 0.0, rp_margin = 0.0;
  double peak_freq_rs = 0.0, peak_freq_rp = 0.0;
  bool valid = true;  // false when the nominal loop is unstable or ill-posed
  std::string note;
};

AnalysisConfig analysis_config_for(const Scenario &sc);
MarginResult margins_at(const AnalysisConfig &base, double M, double C,
                        const MarginConfig &cfg);

struct TuningGrid {
  std::vector<double> M, C;
  static TuningGrid uniform(double lo, double hi, int count);
  std::size_t size() const { return M.size() * C.size(); }
  void validate() const;
};

// Row-major over M then C. threads = 0 picks the hardware concurrency.
std::vector<MarginResult> margins(const AnalysisConfig &base, const TuningGrid &grid,
                                  const MarginConfig &cfg, unsigned threads = 0);

std::string margins_csv(const std::vector<MarginResult> &rows);
std::string margins_manifest(const AnalysisConfig &base, const TuningGrid &grid,
                             const MarginConfig &cfg, const std::string &csv_hash);

struct MonteCarloReport {
  int samples = 0;
  int hurwitz = 0;
  double worst_abscissa = -1e300;
};
// Static random perturbations inside the unit ball of every block, with the
// mass parameter alternating between the interval endpoints.
MonteCarloReport random_delta_check(const AnalysisConfig &base, double M, double C,
                                    const MarginConfig &cfg, int samples,
                                    std::uint64_t seed);

} // namespace cotrans
