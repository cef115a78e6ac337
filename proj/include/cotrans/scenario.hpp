#pragma once

#include "cotrans/admittance.hpp"
#include "cotrans/ekf.hpp"
#include "cotrans/mav.hpp"
#include "cotrans/mission.hpp"
#include "cotrans/payload.hpp"
#include "cotrans/ukf.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cotrans {

enum class EstimatorKind { Ekf, Ukf, NominalLag };
const char *to_string(EstimatorKind k);
EstimatorKind estimator_from_string(const std::string &s);

struct ReferenceScript {
  enum class Kind { Hold, Step, Velocity, Smooth };
  Kind kind = Kind::Hold;
  double t0 = 1.0;             // s after release
  Vec3 delta = Vec3::Zero();   // step / smooth displacement, m
  Vec3 velocity = Vec3::Zero();
  double duration = 4.0;       // smooth transition length, s

  // Offset and rate relative to the start pose at time t after release.
  std::pair<Vec3, Vec3> at(double t) const;
};

struct ScenarioEvent {
  double t = 0.0;
  int agent = -1;  // -1 addresses every slave
  FsmCommand command = FsmCommand::None;
};

struct NoiseConfig {
  bool enabled = false;
  double sigma_p = 1e-3;
  double sigma_v = 1e-2;
  double sigma_att = 1e-3;
  double sigma_omega = 1e-2;
};

struct DivergenceBounds {
  double max_speed = 20.0;      // payload, m/s
  double max_position = 500.0;  // m
  double max_tilt = 1.2;        // agent tilt, rad
  double max_tracking = 50.0;   // |Lambda_r - p_i|, m
};

struct Scenario {
  std::string name = "scenario";
  int n_agents = 2;
  double payload_mass = 1.8;          // nominal, kg
  double payload_mass_factor = 1.0;   // simulated / nominal
  double side = 1.5;                  // polygon side or beam length, m
  std::optional<Vec3> payload_inertia;
  std::vector<Vec3> attachments;      // overrides the polygon when non-empty
  Vec3 payload_drag_F = Vec3::Zero();
  Vec3 payload_drag_M = Vec3::Zero();

  MavParams mav;
  std::vector<double> agent_inertia_scale;  // per agent plant inertia factor
  AdmittanceParams admittance;
  bool fsm_enabled = true;
  bool precalibrated = true;   // slaves start with the static offset removed
  bool engage_at_start = true;

  EstimatorKind estimator = EstimatorKind::Ukf;
  EkfNoise ekf_noise = EkfNoise::defaults();
  UkfNoise ukf_noise = UkfNoise::defaults();
  UkfConfig ukf_config = UkfConfig::standard();

  double Ts_dyn = 1e-3;
  double controller_rate = 100.0;
  double estimator_rate = 100.0;
  std::uint64_t seed = 1;
  double duration = 20.0;
  double altitude = 1.2;
  double feedforward_mass = 0.0;  // 0 selects m + m_p / n

  ReferenceScript master;
  std::vector<ScenarioEvent> events;
  // External force applied to one agent (index) from t_force on, world frame.
  int force_agent = -1;
  double force_time = 0.0;
  Vec3 force = Vec3::Zero();

  bool mission_enabled = false;
  MissionConfig mission;
  double landing_time = -1.0;

  NoiseConfig noise;
  DivergenceBounds bounds;

  PayloadParams payload_params(bool simulated) const;
  double ff_mass() const;
  int controller_divider() const;
  int estimator_divider() const;
  void validate() const;
};

Scenario scenario_from_json_text(const std::string &text);
std::string scenario_to_json_text(const Scenario &sc);
Scenario load_scenario(const std::string &path);
// Stable FNV-1a hash of the canonical JSON form.
std::string config_hash(const std::string &canonical);

// Two agents on a 1.5 m, 1.8 kg beam with the master stepping 1 m along x.
Scenario beam_step_scenario(double M, double C);
// Regular polygon with side 1.2 m and payload 1.5 m_bar.
Scenario polygon_scenario(int n, double M, double C);

} // namespace cotrans
