#pragma once

#include "cotrans/linear_system.hpp"
#include "cotrans/weights.hpp"

#include <string>
#include <vector>

namespace cotrans {

enum class BlockKind { RealScalar, ComplexScalar, ComplexFull };

// One perturbation block. Delta_k maps the plant outputs listed in `outputs`
// back into the plant inputs listed in `inputs`; the weight scales the
// plant outputs before they reach Delta_k.
struct UncertaintyBlock {
  std::string name;
  BlockKind kind = BlockKind::ComplexFull;
  std::vector<std::string> outputs;
  std::vector<std::string> inputs;
  TransferFunction weight = TransferFunction::constant(1.0);

  int dimension() const { return static_cast<int>(inputs.size()); }
};

// Row/column extent of each block inside the assembled N matrix.
struct BlockSpec {
  BlockKind kind = BlockKind::ComplexFull;
  int rows = 0;  // N rows (Delta columns)
  int cols = 0;  // N columns (Delta rows)
};
using DeltaStructure = std::vector<BlockSpec>;

struct PerformanceChannels {
  std::vector<std::string> outputs;  // z
  std::vector<std::string> inputs;   // w
  TransferFunction weight = TransferFunction::constant(1.0);
};

// Weighted interconnection N with the block ordering of `structure`. The
// last structure entry is the performance block when channels are given.
struct NDelta {
  LinearSystem plant;                   // selected, unweighted
  std::vector<TransferFunction> row_weights;
  DeltaStructure structure;
  int n_delta_rows = 0;                 // rows belonging to uncertainty blocks
  int n_delta_cols = 0;
  bool has_performance = false;

  MatrixXcd response(double omega) const;
  // Weights realized as states in series with the plant.
  LinearSystem to_linear_system() const;
  DeltaStructure stability_structure() const;
};

NDelta assemble_n_delta(const LinearSystem &plant,
                        const std::vector<UncertaintyBlock> &blocks,
                        const PerformanceChannels *perf = nullptr);

struct MuBound {
  double mu = 0.0;
  std::vector<double> d;  // one scaling per D group
};

// D-scaled upper bound min_D sigma(D M D^-1). Real blocks are handled as
// complex. `warm` seeds the scalings when its size matches.
MuBound ssv_upper_bound(const MatrixXcd &M, const DeltaStructure &structure,
                        const std::vector<double> *warm = nullptr,
                        int iterations = 40);

struct MuPeak {
  double mu = 0.0;
  double omega = 0.0;
  std::vector<double> mu_curve;
};
// Peak of the bound over a log grid, refined around the maximum with
// `refine_steps` golden-section steps (0 disables refinement).
MuPeak mu_peak(const NDelta &N, const DeltaStructure &structure,
               const std::vector<double> &omega, int refine_steps = 12,
               int iterations = 40);

// Block-diagonal realization of a structured Delta from its blocks.
MatrixXcd block_diagonal(const DeltaStructure &structure,
                         const std::vector<MatrixXcd> &blocks);

} // namespace cotrans
