#include "cotrans/mission.hpp"

#include "cotrans/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cotrans {

const char *to_string(MissionPhase p) {
  switch (p) {
  case MissionPhase::Grounded: return "grounded";
  case MissionPhase::Ascending: return "ascending";
  case MissionPhase::Transporting: return "transporting";
  case MissionPhase::Descending: return "descending";
  case MissionPhase::Landed: return "landed";
  }
  return "unknown";
}

MissionState mission_init(const std::vector<double> &altitudes,
                          const MissionConfig &cfg) {
  if (altitudes.empty())
    throw DimensionMismatch("mission needs at least one agent");
  MissionState ms;
  ms.cfg = cfg;
  ms.ground = altitudes;
  ms.target = altitudes;
  ms.acked.assign(altitudes.size(), true);
  return ms;
}

MissionState mission_start(const MissionState &ms) {
  if (ms.phase != MissionPhase::Grounded)
    throw InvalidCommand("mission already started");
  MissionState out = ms;
  out.phase = MissionPhase::Ascending;
  return out;
}

MissionState mission_request_landing(const MissionState &ms) {
  if (ms.phase != MissionPhase::Transporting)
    throw InvalidCommand("landing can only be requested while transporting");
  MissionState out = ms;
  out.landing_requested = true;
  return out;
}

namespace {

// Height of increment k above ground, capped at the transport altitude.
double level(const MissionConfig &cfg, int k) {
  return std::min(k * cfg.dh, cfg.transport_altitude);
}

int top_increment(const MissionConfig &cfg) {
  return static_cast<int>(std::ceil(cfg.transport_altitude / cfg.dh - 1e-9));
}

void issue(MissionState &s, MissionCommands &cmd, int k) {
  s.increment = k;
  for (std::size_t i = 0; i < s.target.size(); ++i) {
    s.target[i] = s.ground[i] + level(s.cfg, k);
    s.acked[i] = false;
  }
  cmd.altitude_targets = s.target;
}

} // namespace

MissionStepResult mission_step(const MissionState &ms,
                               const std::vector<double> &agent_altitudes,
                               double tol) {
  if (agent_altitudes.size() != ms.target.size() || agent_altitudes.empty())
    throw DimensionMismatch("mission: altitude list size mismatch");
  MissionStepResult r{ms, {}};
  MissionState &s = r.state;
  for (std::size_t i = 0; i < s.target.size(); ++i)
    if (std::abs(agent_altitudes[i] - s.target[i]) <= tol)
      s.acked[i] = true;
  const bool all = std::all_of(s.acked.begin(), s.acked.end(), [](bool b) { return b; });

  switch (s.phase) {
  case MissionPhase::Grounded:
  case MissionPhase::Landed:
    break;
  case MissionPhase::Ascending:
    if (!all)
      break;
    if (s.increment >= top_increment(s.cfg)) {
      s.phase = MissionPhase::Transporting;
      r.commands.engage_slaves = true;
      r.commands.release_master = true;
      s.slaves_engaged = true;
      ++s.engage_count;
    } else {
      issue(s, r.commands, s.increment + 1);
    }
    break;
  case MissionPhase::Transporting:
    if (!s.landing_requested)
      break;
    r.commands.disengage_slaves = true;
    s.slaves_engaged = false;
    s.phase = MissionPhase::Descending;
    // Descent restarts from the current altitude of every agent.
    for (std::size_t i = 0; i < s.ground.size(); ++i)
      s.ground[i] = agent_altitudes[i] - level(s.cfg, s.increment);
    issue(s, r.commands, s.increment - 1);
    break;
  case MissionPhase::Descending:
    if (!all)
      break;
    if (s.increment <= 0)
      s.phase = MissionPhase::Landed;
    else
      issue(s, r.commands, s.increment - 1);
    break;
  }
  return r;
}

} // namespace cotrans
