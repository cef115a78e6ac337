#include "cotrans/margins.hpp"

#include "cotrans/errors.hpp"
#include "cotrans/identification.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

namespace cotrans {

std::vector<double> MarginConfig::frequency_grid() const {
  return log_grid(omega_lo, omega_hi, freq_points);
}

MarginConfig MarginConfig::coarse() const {
  MarginConfig c = *this;
  c.freq_points = 40;
  c.iterations = 25;
  c.refine_steps = 6;
  return c;
}

namespace {

std::string tf_text(const TransferFunction &t) {
  std::ostringstream os;
  os.precision(10);
  os << "[";
  for (std::size_t i = 0; i < t.num.size(); ++i)
    os << (i ? " " : "") << t.num[i];
  os << "]/[";
  for (std::size_t i = 0; i < t.den.size(); ++i)
    os << (i ? " " : "") << t.den[i];
  os << "]";
  return os.str();
}

} // namespace

std::string MarginConfig::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << "mass=" << mass_weight << " inertia=" << inertia_weight
     << " w_pos=" << tf_text(w_pos) << " w_att=" << tf_text(w_att)
     << " w_est=" << tf_text(w_est)
     << " w_perf=" << tf_text(performance.transfer_function())
     << " freq=" << freq_points << "@[" << omega_lo << "," << omega_hi << "]"
     << " refine=" << refine_steps << " iterations=" << iterations;
  return os.str();
}

MarginConfig default_margin_config(const MavParams &mav, EstimatorKind est) {
  MarginConfig cfg;
  const IdentifiedWeights w = identify_weights(mav, est);
  cfg.w_pos = w.w_pos;
  cfg.w_est = w.w_est;
  return cfg;
}

std::vector<UncertaintyBlock> uncertainty_blocks(const AnalysisModel &model,
                                                 const MarginConfig &cfg) {
  const int n = model.n();
  std::vector<UncertaintyBlock> b;
  b.push_back({"mass", BlockKind::RealScalar, {"y_mass_x", "y_mass_y", "y_mass_z"},
               {"u_mass_x", "u_mass_y", "u_mass_z"},
               TransferFunction::constant(cfg.mass_weight)});
  b.push_back({"inertia", BlockKind::ComplexFull,
               {"y_inertia_x", "y_inertia_y", "y_inertia_z"},
               {"u_inertia_x", "u_inertia_y", "u_inertia_z"},
               TransferFunction::constant(cfg.inertia_weight)});
  auto lateral = [](const std::string &p) {
    return std::vector<std::string>{p + "_x", p + "_y"};
  };
  for (int i = 0; i < n; ++i) {
    const std::string s = std::to_string(i);
    b.push_back({"position" + s, BlockKind::ComplexFull, lateral("y_pos" + s),
                 lateral("u_pos" + s), cfg.w_pos});
  }
  for (int i = 0; i < n; ++i) {
    const std::string s = std::to_string(i);
    b.push_back({"attitude" + s, BlockKind::ComplexFull, lateral("y_att" + s),
                 lateral("u_att" + s), cfg.w_att});
  }
  for (int k = 1; k < n; ++k) {
    const std::string s = std::to_string(k);
    b.push_back({"estimator" + s, BlockKind::ComplexFull, lateral("y_est" + s),
                 lateral("u_est" + s), cfg.w_est});
  }
  return b;
}

PerformanceChannels performance_channels(const AnalysisModel &model,
                                         const MarginConfig &cfg) {
  PerformanceChannels p;
  for (int i = 0; i < model.n(); ++i) {
    p.outputs.push_back("z" + std::to_string(i) + "_x");
    p.outputs.push_back("z" + std::to_string(i) + "_y");
  }
  p.inputs = {"w_x", "w_y"};
  p.weight = cfg.performance.transfer_function();
  return p;
}

OperatingInterconnection interconnection(const AnalysisModel &model, OperatingPoint op,
                                         const MarginConfig &cfg) {
  const Linearization lin = linearize(op, model);
  const Reduced red = remove_cyclic_states(lin.sys);
  OperatingInterconnection out;
  out.abscissa = red.sys.spectral_abscissa();
  const auto blocks = uncertainty_blocks(model, cfg);
  const PerformanceChannels perf = performance_channels(model, cfg);
  out.N = assemble_n_delta(red.sys, blocks, &perf);
  return out;
}

AnalysisConfig analysis_config_for(const Scenario &sc) {
  AnalysisConfig c;
  c.n_agents = sc.n_agents;
  c.mav = sc.mav;
  c.payload = sc.payload_params(false);
  c.admittance = sc.admittance;
  c.tau_est = sc.mav.tau_est;
  c.altitude = sc.altitude;
  c.feedforward_mass = sc.feedforward_mass;
  c.agent_drag = sc.mav.K_drag;
  return c;
}

MarginResult margins_at(const AnalysisConfig &base, double M, double C,
                        const MarginConfig &cfg) {
  MarginResult r;
  r.M = M;
  r.C = C;
  if (!(M > 0.0) || !(C > 0.0)) {
    r.valid = false;
    r.note = "admittance mass or damping is zero";
    return r;
  }
  AnalysisConfig ac = base;
  ac.admittance.M.head<2>().setConstant(M);
  ac.admittance.C.head<2>().setConstant(C);
  try {
    const AnalysisModel model(ac);
    const OperatingInterconnection rest = interconnection(model, OperatingPoint::Rest, cfg);
    if (rest.abscissa >= 0.0) {
      r.valid = false;
      r.note = "nominal loop unstable at rest";
      return r;
    }
    const OperatingInterconnection moving =
        interconnection(model, OperatingPoint::Transport, cfg);
    if (moving.abscissa >= 0.0) {
      r.valid = false;
      r.note = "nominal loop unstable in transport";
      return r;
    }
    const auto omega = cfg.frequency_grid();
    const MuPeak rs_rest =
        mu_peak(rest.N, rest.N.stability_structure(), omega, cfg.refine_steps, cfg.iterations);
    const MuPeak rs_move = mu_peak(moving.N, moving.N.stability_structure(), omega,
                                   cfg.refine_steps, cfg.iterations);
    const MuPeak rp_move =
        mu_peak(moving.N, moving.N.structure, omega, cfg.refine_steps, cfg.iterations);
    const MuPeak &rs_peak = rs_rest.mu >= rs_move.mu ? rs_rest : rs_move;
    r.rs_margin = rs_peak.mu > 0.0 ? 1.0 / rs_peak.mu : 1e300;
    r.peak_freq_rs = rs_peak.omega;
    // The performance structure contains the stability structure, so the
    // reported performance margin never exceeds the stability margin.
    const double mu_p = std::max(rp_move.mu, rs_peak.mu);
    r.rp_margin = mu_p > 0.0 ? 1.0 / mu_p : 1e300;
    r.peak_freq_rp = rp_move.mu >= rs_peak.mu ? rp_move.omega : rs_peak.omega;
  } catch (const UnstableOperatingPoint &e) {
    r.valid = false;
    r.note = e.what();
    r.rs_margin = r.rp_margin = 0.0;
  }
  return r;
}

TuningGrid TuningGrid::uniform(double lo, double hi, int count) {
  TuningGrid g;
  for (int i = 0; i < count; ++i) {
    const double v = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    g.M.push_back(v);
    g.C.push_back(v);
  }
  return g;
}

void TuningGrid::validate() const {
  if (M.empty() || C.empty())
    throw ConfigError("tuning grid is empty");
  for (double v : M)
    if (!(v >= 0.0))
      throw ConfigError("tuning grid values must be non-negative");
  for (double v : C)
    if (!(v >= 0.0))
      throw ConfigError("tuning grid values must be non-negative");
}

std::vector<MarginResult> margins(const AnalysisConfig &base, const TuningGrid &grid,
                                  const MarginConfig &cfg, unsigned threads) {
  grid.validate();
  const std::size_t total = grid.size();
  std::vector<MarginResult> out(total);
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t k = next++; k < total; k = next++)
      out[k] = margins_at(base, grid.M[k / grid.C.size()], grid.C[k % grid.C.size()], cfg);
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(work);
    for (auto &t : pool)
      t.join();
  }
  return out;
}

std::string margins_csv(const std::vector<MarginResult> &rows) {
  std::ostringstream os;
  os << "M,C,rs_margin,rp_margin,peak_freq_rs,peak_freq_rp,valid\n";
  char buf[256];
  for (const auto &r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.M, r.C,
                  r.rs_margin, r.rp_margin, r.peak_freq_rs, r.peak_freq_rp, r.valid ? 1 : 0);
    os << buf;
  }
  return os.str();
}

std::string margins_manifest(const AnalysisConfig &base, const TuningGrid &grid,
                             const MarginConfig &cfg, const std::string &csv_hash) {
  nlohmann::json j;
  std::ostringstream cfgtext;
  cfgtext.precision(17);
  cfgtext << "n=" << base.n_agents << " m_p=" << base.payload.m_p << " attachments=";
  for (const auto &a : base.payload.attachments)
    cfgtext << a.transpose() << ";";
  cfgtext << " tau_est=" << base.tau_est << " tau_att=" << base.mav.tau_att << " "
          << cfg.describe();
  j["format"] = "cotrans-margins-manifest";
  j["version"] = 1;
  j["n_agents"] = base.n_agents;
  j["payload_mass"] = base.payload.m_p;
  j["grid"] = {{"M", grid.M}, {"C", grid.C}};
  j["weights"] = cfg.describe();
  j["config_hash"] = config_hash(cfgtext.str());
  j["csv_hash"] = csv_hash;
  return j.dump(2);
}

MonteCarloReport random_delta_check(const AnalysisConfig &base, double M, double C,
                                    const MarginConfig &cfg, int samples,
                                    std::uint64_t seed) {
  AnalysisConfig ac = base;
  ac.admittance.M.head<2>().setConstant(M);
  ac.admittance.C.head<2>().setConstant(C);
  const AnalysisModel model(ac);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  MonteCarloReport rep;
  for (OperatingPoint op : {OperatingPoint::Rest, OperatingPoint::Transport}) {
    const OperatingInterconnection ic = interconnection(model, op, cfg);
    const LinearSystem W = ic.N.to_linear_system();
    const int nr = ic.N.n_delta_rows, nc = ic.N.n_delta_cols;
    const DeltaStructure st = ic.N.stability_structure();
    for (int s = 0; s < samples; ++s) {
      // Delta maps weighted outputs (rows of N) to plant inputs (columns).
      MatrixXd Delta = MatrixXd::Zero(nc, nr);
      int r0 = 0, c0 = 0;
      for (std::size_t b = 0; b < st.size(); ++b) {
        MatrixXd blk(st[b].cols, st[b].rows);
        if (b == 0) {
          // Mass: repeated real scalar, endpoints on alternate samples.
          const double d = s % 4 == 0 ? 1.0 : (s % 4 == 1 ? -1.0 : uni(rng));
          blk = d * MatrixXd::Identity(st[b].cols, st[b].rows);
        } else if (st[b].kind == BlockKind::ComplexFull) {
          for (Eigen::Index i = 0; i < blk.size(); ++i)
            blk.data()[i] = uni(rng);
          Eigen::JacobiSVD<MatrixXd> svd(blk);
          const double sv = svd.singularValues()[0];
          const double target = std::abs(uni(rng));
          if (sv > 0)
            blk *= target / sv;
        } else {
          blk = uni(rng) * MatrixXd::Identity(st[b].cols, st[b].rows);
        }
        Delta.block(c0, r0, st[b].cols, st[b].rows) = blk;
        r0 += st[b].rows;
        c0 += st[b].cols;
      }
      const MatrixXd B = W.B.leftCols(nc);
      const MatrixXd Cw = W.C.topRows(nr);
      const MatrixXd D11 = W.D.topLeftCorner(nr, nc);
      const MatrixXd I = MatrixXd::Identity(nc, nc);
      const MatrixXd K = (I - Delta * D11).partialPivLu().solve(Delta * Cw);
      const MatrixXd Acl = W.A + B * K;
      const double a = Acl.eigenvalues().real().maxCoeff();
      ++rep.samples;
      if (a < 0.0)
        ++rep.hurwitz;
      rep.worst_abscissa = std::max(rep.worst_abscissa, a);
    }
  }
  return rep;
}

} // namespace cotrans
