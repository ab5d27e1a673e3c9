#pragma once

#include "circnav/comms.hpp"
#include "circnav/controller.hpp"
#include "circnav/relative_estimator.hpp"
#include "circnav/sensors.hpp"
#include "circnav/target_estimator.hpp"
#include "circnav/world.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace circnav {

inline constexpr int kSchemaVersion = 1;

struct TargetConfig {
  Vec2 initial_position = Vec2::Zero();
  MotionProfile::Kind kind = MotionProfile::Kind::stationary;
  std::vector<Vec2> waypoints;
  double speed = 0.0;
  bool loop = true;
  std::vector<MotionProfile::VelocityKey> velocity_table;

  MotionProfile profile() const;
};

enum class AgentMode { circumnavigate, scripted_circle };

std::string_view to_string(AgentMode mode);

struct WorldConfig {
  int n_agents = 2;
  double dt = 0.1;
  double duration = 60.0;
  std::vector<ObstacleSegment> obstacles;
  TargetConfig target;
  std::vector<FailureEvent> failures;
  // Agents start on a circle about the target at these phases (degrees),
  // moving along the orbit and facing the target.
  double initial_radius = 2.0;
  std::vector<double> initial_phases_deg;
  Vec4 agent_process_std = Vec4::Zero();
  Vec4 target_process_std = Vec4::Zero();
};

struct SensorConfig {
  VioNoise vio{0.015, 0.0};
  UwbNoiseModel uwb{0.1, 0.02, 0.5, 3.0};
  double uwb_rate_hz = 200.0;
  double uwb_beta = 0.9;
  double uwb_sigma_star = 0.1;
  CameraConfig camera = CameraConfig::forward_looking();
};

struct RelativeConfig {
  EstimatorConfig filter;  // dt is taken from world.dt
  double rls_forgetting = 0.98;
  double rls_initial_gain = 100.0;
  // "zero": every estimator starts at the origin. "approximate": positions
  // start at the true relative position plus N(0, init_position_std^2) noise,
  // as when take-off positions are roughly known.
  std::string init = "zero";
  double init_position_std = 0.0;
};

struct ControllerConfig {
  AgentMode mode = AgentMode::circumnavigate;
  double rho = 2.0;
  double orbit_period = 30.0;  // s per revolution; sets delta_theta
  std::vector<double> coupling;  // empty: defaults for N
  double k_p = 1.0;
  double k_v = 1.5;
  double k_rho = 0.5;
  double u1_max = 3.0;
  double u2_max = 3.0;
  double k_psi = 0.5;
  // scripted_circle mode: agents fly a fixed circle (about the origin)
  double scripted_radius = 2.0;
  double scripted_period = 30.0;

  ControllerGains gains(int n_agents, double dt) const;
};

struct CommsConfig {
  std::string topology = "full";  // full | ring | edges
  std::vector<std::pair<int, int>> edges;
  CommsPolicy policy;
  bool trace = false;
};

struct OutputConfig {
  std::string dir;  // empty: no files written
  double rmse_window_start = 20.0;
  bool log_uwb = false;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name = "custom";
  std::uint64_t seed = 1;
  WorldConfig world;
  SensorConfig sensors;
  RelativeConfig relative;
  TargetEstimatorConfig target_estimator;
  ControllerConfig controller;
  CommsConfig comms;
  OutputConfig output;

  /// Throws ConfigError listing every invalid field.
  void validate() const;
};

/// Parses TOML text; `seed` is mandatory. Unknown keys are rejected.
ScenarioConfig parse_config(std::string_view toml_text);
ScenarioConfig load_config(const std::string& path);

/// Full TOML rendering; parse_config(to_toml(c)) reproduces c.
std::string to_toml(const ScenarioConfig& cfg);

std::vector<std::string> builtin_scenario_names();
std::string builtin_scenario_description(std::string_view name);
/// Throws configuration error for an unknown name.
ScenarioConfig builtin_scenario(std::string_view name);

}  // namespace circnav
