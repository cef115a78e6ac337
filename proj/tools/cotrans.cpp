// Command-line front end: simulate, sweep, oracles, replay.
#include "cotrans/errors.hpp"
#include "cotrans/margins.hpp"
#include "cotrans/mutation.hpp"
#include "cotrans/oracles.hpp"
#include "cotrans/scenario.hpp"
#include "cotrans/simulation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace cotrans;

namespace {

constexpr int kExitDiverged = 2;
constexpr int kExitOracle = 3;

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  out << text;
}

fs::path prepare_dir(const std::string &dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

int cmd_simulate(const std::string &config, const std::string &outdir,
                 std::optional<double> duration, std::optional<std::uint64_t> seed,
                 const std::string &estimator) {
  Scenario sc = load_scenario(config);
  if (duration)
    sc.duration = *duration;
  if (seed)
    sc.seed = *seed;
  if (!estimator.empty())
    sc.estimator = estimator_from_string(estimator);
  sc.validate();
  const RunLog log = run_scenario(sc);
  const fs::path dir = prepare_dir(outdir);
  const fs::path csv = dir / (sc.name + ".csv");
  write_runlog_csv(log, csv.string());
  const LogSample &last = log.last();
  std::printf("scenario %s hash %s agents %d estimator %s\n", sc.name.c_str(),
              log.scenario_hash.c_str(), sc.n_agents, to_string(sc.estimator));
  std::printf("samples %zu  final payload p = (%.4f, %.4f, %.4f)\n", log.samples.size(),
              last.p.x(), last.p.y(), last.p.z());
  for (std::size_t i = 1; i < last.agents.size(); ++i)
    std::printf("agent %zu |F_hat| = %.4f N  mode %s\n", i, last.agents[i].F_hat.norm(),
                to_string(last.agents[i].mode));
  std::printf("log %s\n", csv.string().c_str());
  if (log.diverged) {
    std::printf("DIVERGED at t = %.3f s (step %ld): %s\n", log.divergence_time,
                log.divergence_step, log.divergence_reason.c_str());
    return kExitDiverged;
  }
  return 0;
}

int cmd_sweep(const std::string &config, const std::string &outdir, int count, double lo,
              double hi, bool fine, unsigned threads, std::optional<int> agents) {
  Scenario sc = load_scenario(config);
  if (agents) {
    sc.n_agents = *agents;
    sc.validate();
  }
  const AnalysisConfig base = analysis_config_for(sc);
  MarginConfig cfg = default_margin_config(sc.mav, sc.estimator);
  if (!fine)
    cfg = cfg.coarse();
  const TuningGrid grid = TuningGrid::uniform(lo, hi, count);
  grid.validate();
  std::fprintf(stderr, "sweep n=%d grid %dx%d over [%g, %g], %s\n", base.n_agents, count,
               count, lo, hi, cfg.describe().c_str());
  const auto rows = margins(base, grid, cfg, threads);
  const std::string csv = margins_csv(rows);
  const fs::path dir = prepare_dir(outdir);
  const std::string stem = sc.name + "_n" + std::to_string(base.n_agents);
  write_text(dir / (stem + "_margins.csv"), csv);
  write_text(dir / (stem + "_manifest.json"),
             margins_manifest(base, grid, cfg, config_hash(csv)) + "\n");
  double best = 0.0;
  int robust = 0;
  for (const auto &r : rows) {
    best = std::max(best, r.rs_margin);
    robust += r.rs_margin > 1.0;
  }
  std::printf("points %zu  robustly stable %d  max rs %.4f\n", rows.size(), robust, best);
  std::printf("csv %s\n", (dir / (stem + "_margins.csv")).string().c_str());
  return 0;
}

int cmd_oracles(const std::string &mutation, std::uint64_t seed) {
  OracleOptions opts;
  opts.seed = seed;
  const MutationScope scope(mutation.empty() ? Mutation::None : mutation_from_string(mutation));
  const OracleReport rep = oracle_suite(opts);
  std::cout << rep.text();
  std::printf("%s: %d of %zu oracles failed\n", rep.passed() ? "PASS" : "FAIL", rep.failures(),
              rep.results.size());
  return rep.passed() ? 0 : kExitOracle;
}

int cmd_replay(const std::string &logpath, const std::string &outdir, int agent,
               const std::string &estimator) {
  const RunLog log = read_runlog_csv(logpath);
  if (agent < 0 || agent >= log.n_agents)
    throw IndexOutOfRange("agent index outside the log");
  const EstimatorKind kind = estimator_from_string(estimator);
  const auto samples = replay_estimator(log, agent, kind);
  const fs::path dir = prepare_dir(outdir);
  const fs::path out =
      dir / (fs::path(logpath).stem().string() + "_replay_a" + std::to_string(agent) + ".csv");
  std::ofstream os(out);
  os << "t,F_hat_x,F_hat_y,F_hat_z\n";
  char buf[160];
  for (const auto &s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.t, s.F_hat.x(), s.F_hat.y(),
                  s.F_hat.z());
    os << buf;
  }
  if (!samples.empty())
    std::printf("replayed %zu samples, final F_hat = (%.4f, %.4f, %.4f)\n", samples.size(),
                samples.back().F_hat.x(), samples.back().F_hat.y(), samples.back().F_hat.z());
  std::printf("csv %s\n", out.string().c_str());
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Cooperative payload transport: simulation and robust tuning"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string outdir = "out";
  app.add_option("-o,--output", outdir, "Output directory");

  auto *sim = app.add_subcommand("simulate", "Run a scenario and write its log");
  std::string sim_config, sim_estimator;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  sim->add_option("config", sim_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--duration", duration, "Override the duration, s");
  sim->add_option("--seed", seed, "Override the noise seed");
  sim->add_option("--estimator", sim_estimator, "ekf, ukf or nominal-lag");

  auto *sweep = app.add_subcommand("sweep", "Margin map over the (M, C) grid");
  std::string sweep_config;
  int count = 31;
  double lo = 0.0, hi = 30.0;
  bool fine = false;
  unsigned threads = 0;
  std::optional<int> agents;
  sweep->add_option("config", sweep_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--points", count, "Grid points per axis")->check(CLI::PositiveNumber);
  sweep->add_option("--min", lo, "Lower grid bound");
  sweep->add_option("--max", hi, "Upper grid bound");
  sweep->add_flag("--fine", fine, "Full frequency resolution");
  sweep->add_option("--threads", threads, "Worker threads, 0 = all cores");
  sweep->add_option("--agents", agents, "Override the agent count")->check(CLI::Range(2, 64));

  auto *orc = app.add_subcommand("oracles", "Run the built-in oracle suite");
  std::string mutation;
  std::uint64_t oracle_seed = 1;
  orc->add_option("--mutation", mutation, "Inject a deliberate sign error");
  orc->add_option("--seed", oracle_seed, "Random seed");

  auto *rep = app.add_subcommand("replay", "Feed a logged run back through an estimator");
  std::string logpath, rep_estimator = "ukf";
  int agent = 1;
  rep->add_option("log", logpath, "Run log CSV")->required()->check(CLI::ExistingFile);
  rep->add_option("--agent", agent, "Agent index");
  rep->add_option("--estimator", rep_estimator, "ekf, ukf or nominal-lag");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim)
      return cmd_simulate(sim_config, outdir, duration, seed, sim_estimator);
    if (*sweep)
      return cmd_sweep(sweep_config, outdir, count, lo, hi, fine, threads, agents);
    if (*orc)
      return cmd_oracles(mutation, oracle_seed);
    if (*rep)
      return cmd_replay(logpath, outdir, agent, rep_estimator);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
