#include "cotrans/errors.hpp"
#include "cotrans/mission.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace cotrans;

namespace {

struct Trace {
  std::vector<MissionPhase> phases;
  int engages = 0;
  int disengages = 0;
  bool disengaged_before_descent = true;
  bool barrier_held = true;
  double peak = 0.0;
};

// Agents approach their targets at a fixed rate; agent `slow` moves slower.
Trace fly(int n, int slow, double landing_after) {
  MissionState ms = mission_start(mission_init(std::vector<double>(n, 0.0)));
  std::vector<double> alt(n, 0.0);
  Trace tr;
  tr.phases.push_back(MissionPhase::Grounded);
  tr.phases.push_back(ms.phase);
  double transport_time = 0.0;
  for (int k = 0; k < 20000 && ms.phase != MissionPhase::Landed; ++k) {
    const std::vector<double> before = ms.target;
    const std::vector<bool> acked = ms.acked;
    const MissionStepResult r = mission_step(ms, alt);
    if (!r.commands.altitude_targets.empty() && r.state.phase == MissionPhase::Ascending) {
      // Every agent must have been within tolerance of the previous target.
      for (int i = 0; i < n; ++i)
        if (std::abs(alt[i] - before[i]) > ms.cfg.tol && !acked[i])
          tr.barrier_held = false;
    }
    tr.engages += r.commands.engage_slaves;
    tr.disengages += r.commands.disengage_slaves;
    if (r.state.phase == MissionPhase::Descending && ms.phase != MissionPhase::Descending)
      tr.disengaged_before_descent = r.commands.disengage_slaves && !r.state.slaves_engaged;
    ms = r.state;
    if (tr.phases.back() != ms.phase)
      tr.phases.push_back(ms.phase);
    if (ms.phase == MissionPhase::Transporting) {
      transport_time += 0.01;
      if (transport_time > landing_after && !ms.landing_requested)
        ms = mission_request_landing(ms);
    }
    for (int i = 0; i < n; ++i) {
      const double rate = i == slow ? 0.002 : 0.01;
      const double d = ms.target[i] - alt[i];
      alt[i] += std::clamp(d, -rate, rate);
      tr.peak = std::max(tr.peak, alt[i]);
    }
  }
  return tr;
}

} // namespace

TEST(Mission, StartsGroundedAndRejectsEarlyLanding) {
  const MissionState ms = mission_init({0.0, 0.1});
  EXPECT_EQ(ms.phase, MissionPhase::Grounded);
  EXPECT_THROW(mission_request_landing(ms), InvalidCommand);
  EXPECT_THROW(mission_init({}), DimensionMismatch);
  EXPECT_THROW(mission_start(mission_start(ms)), InvalidCommand);
}

TEST(Mission, IncrementIssuedWhenAllAtTarget) {
  MissionState ms = mission_start(mission_init({0.0, 0.1, 0.0}));
  const MissionStepResult r = mission_step(ms, {0.0, 0.1, 0.02});
  ASSERT_EQ(r.commands.altitude_targets.size(), 3u);
  EXPECT_DOUBLE_EQ(r.commands.altitude_targets[0], 0.25);
  EXPECT_DOUBLE_EQ(r.commands.altitude_targets[1], 0.35);
  EXPECT_EQ(r.state.increment, 1);
}

TEST(Mission, LaggingAgentBlocksIncrement) {
  MissionState ms = mission_start(mission_init({0.0, 0.0}));
  ms = mission_step(ms, {0.0, 0.0}).state;
  const MissionStepResult r = mission_step(ms, {0.25, 0.1});
  EXPECT_TRUE(r.commands.altitude_targets.empty());
  EXPECT_EQ(r.state.increment, 1);
  const MissionStepResult r2 = mission_step(r.state, {0.25, 0.24});
  EXPECT_EQ(r2.state.increment, 2);
  EXPECT_THROW(mission_step(ms, {0.0}), DimensionMismatch);
}

TEST(Mission, FullScriptPhaseSequence) {
  const Trace tr = fly(3, 1, 2.0);
  const std::vector<MissionPhase> want{MissionPhase::Grounded, MissionPhase::Ascending,
                                       MissionPhase::Transporting, MissionPhase::Descending,
                                       MissionPhase::Landed};
  EXPECT_EQ(tr.phases, want);
  EXPECT_EQ(tr.engages, 1);
  EXPECT_EQ(tr.disengages, 1);
  EXPECT_TRUE(tr.disengaged_before_descent);
  EXPECT_TRUE(tr.barrier_held);
  EXPECT_NEAR(tr.peak, 1.2, 1e-9);
}

TEST(Mission, TransportAltitudeIsCapped) {
  MissionConfig cfg;
  cfg.transport_altitude = 1.2;
  MissionState ms = mission_start(mission_init({0.5}, cfg));
  std::vector<double> targets;
  for (int k = 0; k < 10 && ms.phase == MissionPhase::Ascending; ++k) {
    const MissionStepResult r = mission_step(ms, {ms.target[0]});
    if (!r.commands.altitude_targets.empty())
      targets.push_back(r.commands.altitude_targets[0] - 0.5);
    ms = r.state;
  }
  const std::vector<double> want{0.25, 0.5, 0.75, 1.0, 1.2};
  ASSERT_EQ(targets.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    EXPECT_NEAR(targets[i], want[i], 1e-12);
  EXPECT_EQ(ms.phase, MissionPhase::Transporting);
}

TEST(Mission, PhaseNames) {
  EXPECT_STREQ(to_string(MissionPhase::Descending), "descending");
  EXPECT_STREQ(to_string(MissionPhase::Landed), "landed");
}
