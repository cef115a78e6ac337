#pragma once

#include "cotrans/scenario.hpp"

#include <string>
#include <vector>

namespace cotrans {

struct AgentSample {
  Vec3 p = Vec3::Zero(), v = Vec3::Zero();
  UnitQuaternion q;
  Vec3 omega = Vec3::Zero();
  Vec3 F_prop = Vec3::Zero();   // world thrust vector
  EkfInput cmd;                 // attitude commands and collective thrust
  RotorSpeeds rotors;
  Vec3 F_hat = Vec3::Zero();    // offset-corrected estimate, world frame
  Vec3 F_raw = Vec3::Zero();    // estimator output before offset removal
  Vec3 F_joint = Vec3::Zero();  // true joint force plus disturbance
  Vec3 Lr = Vec3::Zero(), Lr_dot = Vec3::Zero();
  FsmMode mode = FsmMode::Disengaged;
};

struct LogSample {
  double t = 0.0;
  Vec3 p = Vec3::Zero(), v = Vec3::Zero();
  UnitQuaternion q;
  Vec3 omega = Vec3::Zero();
  MissionPhase phase = MissionPhase::Transporting;
  std::vector<AgentSample> agents;
};

struct RunLog {
  static constexpr int kVersion = 1;
  std::string scenario_hash;
  int n_agents = 0;
  int rotor_count = 6;
  double dt = 0.01;
  std::vector<LogSample> samples;
  bool diverged = false;
  double divergence_time = 0.0;
  long divergence_step = -1;  // dynamics step index
  std::string divergence_reason;

  const LogSample &last() const { return samples.back(); }
};

// Estimator covariance diagnostics gathered during a run.
struct CovarianceStats {
  double max_asymmetry = 0.0;
  double min_eigenvalue = 0.0;
  long checks = 0;
};

struct RunOptions {
  bool check_covariance = false;
};

struct RunResult {
  RunLog log;
  CovarianceStats covariance;
};

RunResult run_scenario_ex(const Scenario &sc, const RunOptions &opt);
RunLog run_scenario(const Scenario &sc);

void write_runlog_csv(const RunLog &log, const std::string &path);
std::string runlog_to_csv(const RunLog &log);
RunLog runlog_from_csv(const std::string &text);
RunLog read_runlog_csv(const std::string &path);

struct ReplaySample {
  double t;
  Vec3 F_hat;
};
// Feeds the logged measurements and commands of one agent through an
// estimator and returns its force estimate (raw, world frame) per sample.
std::vector<ReplaySample> replay_estimator(const RunLog &log, int agent,
                                           EstimatorKind kind,
                                           const MavParams &params = MavParams());

} // namespace cotrans
