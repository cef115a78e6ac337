#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cotrans {

enum class MissionPhase { Grounded, Ascending, Transporting, Descending, Landed };
const char *to_string(MissionPhase p);

struct MissionConfig {
  double dh = 0.25;                 // altitude increment, m
  double tol = 0.05;                // acknowledgment tolerance, m
  double transport_altitude = 1.2;  // above each agent's start altitude, m
};

struct MissionState {
  MissionPhase phase = MissionPhase::Grounded;
  MissionConfig cfg;
  std::vector<double> ground;   // per-agent start altitude
  std::vector<double> target;   // per-agent current altitude target
  std::vector<bool> acked;
  int increment = 0;            // increments issued so far (signed climb count)
  int engage_count = 0;
  bool landing_requested = false;
  bool slaves_engaged = false;
};

struct MissionCommands {
  std::vector<double> altitude_targets;  // empty when unchanged
  bool engage_slaves = false;
  bool disengage_slaves = false;
  bool release_master = false;
};

MissionState mission_init(const std::vector<double> &altitudes,
                          const MissionConfig &cfg = {});
// Leaves Grounded and issues the first increment on the next step.
MissionState mission_start(const MissionState &ms);
MissionState mission_request_landing(const MissionState &ms);

struct MissionStepResult {
  MissionState state;
  MissionCommands commands;
};
MissionStepResult mission_step(const MissionState &ms,
                               const std::vector<double> &agent_altitudes,
                               double tol);
inline MissionStepResult mission_step(const MissionState &ms,
                                      const std::vector<double> &agent_altitudes) {
  return mission_step(ms, agent_altitudes, ms.cfg.tol);
}

} // namespace cotrans
