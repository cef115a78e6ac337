#include "cotrans/scenario.hpp"

#include "cotrans/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cotrans {

using nlohmann::json;

const char *to_string(EstimatorKind k) {
  switch (k) {
  case EstimatorKind::Ekf: return "ekf";
  case EstimatorKind::Ukf: return "ukf";
  case EstimatorKind::NominalLag: return "nominal-lag";
  }
  return "unknown";
}

EstimatorKind estimator_from_string(const std::string &s) {
  if (s == "ekf") return EstimatorKind::Ekf;
  if (s == "ukf") return EstimatorKind::Ukf;
  if (s == "nominal-lag") return EstimatorKind::NominalLag;
  throw ConfigError("unknown estimator '" + s + "'");
}

std::pair<Vec3, Vec3> ReferenceScript::at(double t) const {
  switch (kind) {
  case Kind::Hold:
    break;
  case Kind::Step:
    if (t >= t0)
      return {delta, Vec3::Zero()};
    break;
  case Kind::Velocity:
    if (t >= t0)
      return {velocity * (t - t0), velocity};
    break;
  case Kind::Smooth: {
    if (t <= t0)
      break;
    if (t >= t0 + duration)
      return {delta, Vec3::Zero()};
    // Minimum-jerk blend.
    const double s = (t - t0) / duration;
    const double pos = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    const double vel = 30.0 * s * s * (1.0 - s) * (1.0 - s) / duration;
    return {delta * pos, delta * vel};
  }
  }
  return {Vec3::Zero(), Vec3::Zero()};
}

PayloadParams Scenario::payload_params(bool simulated) const {
  const double m = simulated ? payload_mass * payload_mass_factor : payload_mass;
  PayloadParams p = polygon_payload(m, n_agents, side);
  if (!attachments.empty()) {
    p.attachments = attachments;
    p.R_PB.assign(attachments.size(), Mat3::Identity());
  }
  if (payload_inertia)
    p.J_p = *payload_inertia * (m / payload_mass);
  p.drag_F = payload_drag_F;
  p.drag_M = payload_drag_M;
  return p;
}

double Scenario::ff_mass() const {
  return feedforward_mass > 0.0 ? feedforward_mass : mav.m + payload_mass / n_agents;
}

namespace {

int divider(double Ts, double rate, const char *what) {
  const double d = 1.0 / (rate * Ts);
  const long r = std::lround(d);
  if (r < 1 || std::abs(d - r) > 1e-9 * d)
    throw ConfigError(std::string(what) + " rate must divide the dynamics rate");
  return static_cast<int>(r);
}

} // namespace

int Scenario::controller_divider() const { return divider(Ts_dyn, controller_rate, "controller"); }
int Scenario::estimator_divider() const { return divider(Ts_dyn, estimator_rate, "estimator"); }

void Scenario::validate() const {
  if (n_agents < 1)
    throw ConfigError("n_agents must be positive");
  if (!attachments.empty() && static_cast<int>(attachments.size()) != n_agents)
    throw ConfigError("attachment count must equal n_agents");
  if (payload_mass <= 0 || payload_mass_factor <= 0 || side <= 0)
    throw ConfigError("payload mass and size must be positive");
  if (duration <= 0 || Ts_dyn <= 0)
    throw ConfigError("duration and Ts_dyn must be positive");
  if (!agent_inertia_scale.empty() &&
      static_cast<int>(agent_inertia_scale.size()) != n_agents)
    throw ConfigError("agent_inertia_scale must list every agent");
  for (double s : agent_inertia_scale)
    if (s <= 0)
      throw ConfigError("inertia scales must be positive");
  const int cd = controller_divider(), ed = estimator_divider();
  if (ed > cd || cd % ed != 0)
    throw ConfigError("estimator rate must be an integer multiple of the controller rate");
  mav.validate();
  admittance.validate();
  if (force_agent >= n_agents)
    throw ConfigError("force_agent out of range");
}

namespace {

json vec(const Vec3 &v) { return json::array({v[0], v[1], v[2]}); }

Vec3 read_vec(const json &j, const char *key, const Vec3 &def) {
  if (!j.contains(key))
    return def;
  const auto &a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw ConfigError(std::string("'") + key + "' must be a 3-vector");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

template <class T> T read(const json &j, const char *key, T def) {
  return j.contains(key) ? j.at(key).get<T>() : def;
}

const char *ref_kind_name(ReferenceScript::Kind k) {
  switch (k) {
  case ReferenceScript::Kind::Hold: return "hold";
  case ReferenceScript::Kind::Step: return "step";
  case ReferenceScript::Kind::Velocity: return "velocity";
  case ReferenceScript::Kind::Smooth: return "smooth";
  }
  return "hold";
}

ReferenceScript::Kind ref_kind(const std::string &s) {
  if (s == "hold") return ReferenceScript::Kind::Hold;
  if (s == "step") return ReferenceScript::Kind::Step;
  if (s == "velocity") return ReferenceScript::Kind::Velocity;
  if (s == "smooth") return ReferenceScript::Kind::Smooth;
  throw ConfigError("unknown reference kind '" + s + "'");
}

const char *command_name(FsmCommand c) {
  switch (c) {
  case FsmCommand::None: return "none";
  case FsmCommand::Engage: return "engage";
  case FsmCommand::Disengage: return "disengage";
  case FsmCommand::ComputeOffset: return "compute_offset";
  case FsmCommand::RemoveOffset: return "remove_offset";
  }
  return "none";
}

FsmCommand command_from(const std::string &s) {
  for (FsmCommand c : {FsmCommand::None, FsmCommand::Engage, FsmCommand::Disengage,
                       FsmCommand::ComputeOffset, FsmCommand::RemoveOffset})
    if (s == command_name(c))
      return c;
  throw ConfigError("unknown command '" + s + "'");
}

} // namespace

Scenario scenario_from_json_text(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  Scenario sc;
  try {
    sc.name = read<std::string>(j, "name", sc.name);
    sc.n_agents = read(j, "n_agents", sc.n_agents);
    sc.duration = read(j, "duration", sc.duration);
    sc.seed = read<std::uint64_t>(j, "seed", sc.seed);
    sc.altitude = read(j, "altitude", sc.altitude);
    sc.feedforward_mass = read(j, "feedforward_mass", sc.feedforward_mass);
    sc.estimator = estimator_from_string(read<std::string>(j, "estimator", "ukf"));
    sc.fsm_enabled = read(j, "fsm_enabled", sc.fsm_enabled);
    sc.precalibrated = read(j, "precalibrated", sc.precalibrated);
    sc.engage_at_start = read(j, "engage_at_start", sc.engage_at_start);

    if (j.contains("timing")) {
      const auto &t = j["timing"];
      sc.Ts_dyn = read(t, "Ts_dyn", sc.Ts_dyn);
      sc.controller_rate = read(t, "controller_rate", sc.controller_rate);
      sc.estimator_rate = read(t, "estimator_rate", sc.estimator_rate);
    }
    if (j.contains("payload")) {
      const auto &p = j["payload"];
      sc.payload_mass = read(p, "mass", sc.payload_mass);
      sc.payload_mass_factor = read(p, "mass_factor", sc.payload_mass_factor);
      sc.side = read(p, "side", sc.side);
      if (p.contains("inertia"))
        sc.payload_inertia = read_vec(p, "inertia", Vec3::Zero());
      if (p.contains("attachments"))
        for (const auto &a : p["attachments"])
          sc.attachments.emplace_back(a[0].get<double>(), a[1].get<double>(),
                                      a[2].get<double>());
      sc.payload_drag_F = read_vec(p, "drag_F", sc.payload_drag_F);
      sc.payload_drag_M = read_vec(p, "drag_M", sc.payload_drag_M);
    }
    if (j.contains("agent")) {
      const auto &a = j["agent"];
      auto &m = sc.mav;
      m.m = read(a, "mass", m.m);
      m.J = read_vec(a, "inertia", m.J);
      m.k_drag = read(a, "k_drag", m.k_drag);
      m.K_drag = read_vec(a, "K_drag", m.K_drag);
      m.F_prop_max = read(a, "F_prop_max", m.F_prop_max);
      m.phi_cmd_max = read(a, "phi_cmd_max", m.phi_cmd_max);
      m.theta_cmd_max = read(a, "theta_cmd_max", m.theta_cmd_max);
      m.tau_att = read(a, "tau_att", m.tau_att);
      m.tau_est = read(a, "tau_est", m.tau_est);
      m.m_bar = read(a, "m_bar", m.m_bar);
      m.K_P = read_vec(a, "K_P", m.K_P);
      m.K_D = read_vec(a, "K_D", m.K_D);
      m.derive_attitude_gains();
      if (a.contains("inertia_scale"))
        sc.agent_inertia_scale = a["inertia_scale"].get<std::vector<double>>();
    }
    if (j.contains("admittance")) {
      const auto &a = j["admittance"];
      auto &p = sc.admittance;
      p.M = read_vec(a, "M", p.M);
      p.C = read_vec(a, "C", p.C);
      p.K = read_vec(a, "K", p.K);
      p.F_up = read(a, "F_up", p.F_up);
      p.F_low = read(a, "F_low", p.F_low);
      p.T_up = read(a, "T_up", p.T_up);
      p.T_low = read(a, "T_low", p.T_low);
      p.T_avg = read(a, "T_avg", p.T_avg);
      p.yaw_enabled = read(a, "yaw_enabled", p.yaw_enabled);
      p.J_psi = read(a, "J_psi", p.J_psi);
      p.C_psi = read(a, "C_psi", p.C_psi);
      p.K_psi = read(a, "K_psi", p.K_psi);
    }
    if (j.contains("master")) {
      const auto &m = j["master"];
      sc.master.kind = ref_kind(read<std::string>(m, "kind", "hold"));
      sc.master.t0 = read(m, "t0", sc.master.t0);
      sc.master.delta = read_vec(m, "delta", sc.master.delta);
      sc.master.velocity = read_vec(m, "velocity", sc.master.velocity);
      sc.master.duration = read(m, "duration", sc.master.duration);
    }
    if (j.contains("events"))
      for (const auto &e : j["events"])
        sc.events.push_back({e.at("t").get<double>(), read(e, "agent", -1),
                             command_from(e.at("command").get<std::string>())});
    if (j.contains("disturbance")) {
      const auto &d = j["disturbance"];
      sc.force_agent = read(d, "agent", sc.force_agent);
      sc.force_time = read(d, "t", sc.force_time);
      sc.force = read_vec(d, "force", sc.force);
    }
    if (j.contains("mission")) {
      const auto &m = j["mission"];
      sc.mission_enabled = read(m, "enabled", true);
      sc.mission.dh = read(m, "dh", sc.mission.dh);
      sc.mission.tol = read(m, "tol", sc.mission.tol);
      sc.mission.transport_altitude = read(m, "transport_altitude", sc.mission.transport_altitude);
      sc.landing_time = read(m, "landing_time", sc.landing_time);
    }
    if (j.contains("noise")) {
      const auto &n = j["noise"];
      sc.noise.enabled = read(n, "enabled", true);
      sc.noise.sigma_p = read(n, "sigma_p", sc.noise.sigma_p);
      sc.noise.sigma_v = read(n, "sigma_v", sc.noise.sigma_v);
      sc.noise.sigma_att = read(n, "sigma_att", sc.noise.sigma_att);
      sc.noise.sigma_omega = read(n, "sigma_omega", sc.noise.sigma_omega);
    }
    if (j.contains("bounds")) {
      const auto &b = j["bounds"];
      sc.bounds.max_speed = read(b, "max_speed", sc.bounds.max_speed);
      sc.bounds.max_position = read(b, "max_position", sc.bounds.max_position);
      sc.bounds.max_tilt = read(b, "max_tilt", sc.bounds.max_tilt);
      sc.bounds.max_tracking = read(b, "max_tracking", sc.bounds.max_tracking);
    }
  } catch (const json::exception &e) {
    throw ConfigError(std::string("invalid scenario field: ") + e.what());
  }
  sc.ukf_config = UkfConfig::standard(1.0 / sc.estimator_rate);
  sc.validate();
  return sc;
}

std::string scenario_to_json_text(const Scenario &sc) {
  json j;
  j["name"] = sc.name;
  j["n_agents"] = sc.n_agents;
  j["duration"] = sc.duration;
  j["seed"] = sc.seed;
  j["altitude"] = sc.altitude;
  j["feedforward_mass"] = sc.feedforward_mass;
  j["estimator"] = to_string(sc.estimator);
  j["fsm_enabled"] = sc.fsm_enabled;
  j["precalibrated"] = sc.precalibrated;
  j["engage_at_start"] = sc.engage_at_start;
  j["timing"] = {{"Ts_dyn", sc.Ts_dyn},
                 {"controller_rate", sc.controller_rate},
                 {"estimator_rate", sc.estimator_rate}};
  json p = {{"mass", sc.payload_mass},
            {"mass_factor", sc.payload_mass_factor},
            {"side", sc.side},
            {"drag_F", vec(sc.payload_drag_F)},
            {"drag_M", vec(sc.payload_drag_M)}};
  if (sc.payload_inertia)
    p["inertia"] = vec(*sc.payload_inertia);
  if (!sc.attachments.empty()) {
    p["attachments"] = json::array();
    for (const auto &a : sc.attachments)
      p["attachments"].push_back(vec(a));
  }
  j["payload"] = p;
  const auto &m = sc.mav;
  j["agent"] = {{"mass", m.m},           {"inertia", vec(m.J)},
                {"k_drag", m.k_drag},    {"K_drag", vec(m.K_drag)},
                {"F_prop_max", m.F_prop_max}, {"phi_cmd_max", m.phi_cmd_max},
                {"theta_cmd_max", m.theta_cmd_max}, {"tau_att", m.tau_att},
                {"tau_est", m.tau_est},  {"m_bar", m.m_bar},
                {"K_P", vec(m.K_P)},     {"K_D", vec(m.K_D)}};
  if (!sc.agent_inertia_scale.empty())
    j["agent"]["inertia_scale"] = sc.agent_inertia_scale;
  const auto &a = sc.admittance;
  j["admittance"] = {{"M", vec(a.M)},     {"C", vec(a.C)},         {"K", vec(a.K)},
                     {"F_up", a.F_up},    {"F_low", a.F_low},      {"T_up", a.T_up},
                     {"T_low", a.T_low},  {"T_avg", a.T_avg},      {"yaw_enabled", a.yaw_enabled},
                     {"J_psi", a.J_psi},  {"C_psi", a.C_psi},      {"K_psi", a.K_psi}};
  j["master"] = {{"kind", ref_kind_name(sc.master.kind)}, {"t0", sc.master.t0},
                 {"delta", vec(sc.master.delta)},          {"velocity", vec(sc.master.velocity)},
                 {"duration", sc.master.duration}};
  j["events"] = json::array();
  for (const auto &e : sc.events)
    j["events"].push_back({{"t", e.t}, {"agent", e.agent}, {"command", command_name(e.command)}});
  j["disturbance"] = {{"agent", sc.force_agent}, {"t", sc.force_time}, {"force", vec(sc.force)}};
  j["mission"] = {{"enabled", sc.mission_enabled},
                  {"dh", sc.mission.dh},
                  {"tol", sc.mission.tol},
                  {"transport_altitude", sc.mission.transport_altitude},
                  {"landing_time", sc.landing_time}};
  j["noise"] = {{"enabled", sc.noise.enabled}, {"sigma_p", sc.noise.sigma_p},
                {"sigma_v", sc.noise.sigma_v}, {"sigma_att", sc.noise.sigma_att},
                {"sigma_omega", sc.noise.sigma_omega}};
  j["bounds"] = {{"max_speed", sc.bounds.max_speed},
                 {"max_position", sc.bounds.max_position},
                 {"max_tilt", sc.bounds.max_tilt},
                 {"max_tracking", sc.bounds.max_tracking}};
  return j.dump(2);
}

Scenario load_scenario(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

std::string config_hash(const std::string &canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario beam_step_scenario(double M, double C) {
  Scenario sc;
  sc.name = "beam-step";
  sc.n_agents = 2;
  sc.payload_mass = 1.8;
  sc.side = 1.5;
  sc.admittance = AdmittanceParams::horizontal(M, C);
  sc.master.kind = ReferenceScript::Kind::Step;
  sc.master.t0 = 1.0;
  sc.master.delta = Vec3(1.0, 0.0, 0.0);
  sc.duration = 25.0;
  return sc;
}

Scenario polygon_scenario(int n, double M, double C) {
  Scenario sc;
  sc.name = "polygon";
  sc.n_agents = n;
  sc.payload_mass = 1.5 * sc.mav.m_bar;
  sc.side = 1.2;
  sc.admittance = AdmittanceParams::horizontal(M, C);
  sc.master.kind = ReferenceScript::Kind::Step;
  sc.master.t0 = 1.0;
  sc.master.delta = Vec3(1.0, 0.0, 0.0);
  sc.duration = 25.0;
  return sc;
}

} // namespace cotrans
