#pragma once

#include "circnav/linalg.hpp"
#include "circnav/random.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace circnav {

struct TargetState {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
};

struct AgentState {
  int id = 0;  // 1..N
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  double psi = 0.0;  // (-pi, pi]
  bool alive = true;
};

/// Wall segment in the plane. Endpoints must differ.
struct ObstacleSegment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
};

/// Target velocity schedule. Velocities are a pure function of time.
class MotionProfile {
 public:
  enum class Kind { stationary, waypoint_path, scripted_velocity };

  struct VelocityKey {
    double t = 0.0;  // key is active on [t, next key)
    Vec2 v = Vec2::Zero();
  };

  static MotionProfile stationary();
  static MotionProfile waypoint_path(std::vector<Vec2> waypoints, double speed, bool loop);
  static MotionProfile scripted_velocity(std::vector<VelocityKey> table);

  Kind kind() const { return kind_; }
  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  double speed() const { return speed_; }
  bool loop() const { return loop_; }
  const std::vector<VelocityKey>& table() const { return table_; }

  Vec2 velocity_at(double t) const;

 private:
  Kind kind_ = Kind::stationary;
  std::vector<Vec2> waypoints_;
  double speed_ = 0.0;
  bool loop_ = false;
  std::vector<VelocityKey> table_;
};

/// Zero-mean Gaussian process noise with diagonal covariance over [p; v].
class ProcessNoise {
 public:
  ProcessNoise() = default;
  ProcessNoise(const Vec4& stddev, std::uint64_t seed, std::uint64_t stream_id);

  Vec4 sample();

 private:
  Vec4 stddev_ = Vec4::Zero();
  RngStream rng_{0, 0};
};

/// x' = A x + omega, with v' taken from the profile at t_next.
TargetState step_target(const TargetState& s, const MotionProfile& profile, double t_next, double dt,
                        const Vec4& omega);

/// x' = A x + B u + omega. Dead agents are returned unchanged.
AgentState step_agent(const AgentState& s, const Vec2& u, double dt, const Vec4& omega);

/// True iff the segment a-b touches no obstacle. Touching an obstacle endpoint
/// or running along an obstacle counts as blocked.
bool line_of_sight(const Vec2& a, const Vec2& b, std::span<const ObstacleSegment> obstacles);

struct FailureEvent {
  int agent_id = 0;
  double t_fail = 0.0;
};

struct WorldNoise {
  Vec4 agent_stddev = Vec4::Zero();
  Vec4 target_stddev = Vec4::Zero();
};

/// Ground truth. The scenario runner is the single writer.
class World {
 public:
  World(std::vector<AgentState> agents, TargetState target, MotionProfile profile,
        std::vector<ObstacleSegment> obstacles, double dt, const WorldNoise& noise,
        std::uint64_t seed);

  /// Schedules agent_id to fail at the first step boundary with t >= t_fail.
  void inject_failure(int agent_id, double t_fail);

  /// Applies every scheduled failure that is due at the current time, in
  /// time order. Returns the ids that died at this boundary.
  std::vector<int> apply_due_failures();

  /// Advances one step. u and yaw_rate are indexed by agent position (id-1).
  void step(std::span<const Vec2> u, std::span<const double> yaw_rate);

  const std::vector<AgentState>& agents() const { return agents_; }
  const AgentState& agent(int id) const;
  const TargetState& target() const { return target_; }
  const std::vector<ObstacleSegment>& obstacles() const { return obstacles_; }
  std::vector<int> alive_ids() const;
  double dt() const { return dt_; }
  double time() const { return static_cast<double>(k_) * dt_; }
  long step_index() const { return k_; }

 private:
  std::vector<AgentState> agents_;
  TargetState target_;
  MotionProfile profile_;
  std::vector<ObstacleSegment> obstacles_;
  double dt_;
  long k_ = 0;
  std::vector<ProcessNoise> agent_noise_;
  ProcessNoise target_noise_;
  std::vector<FailureEvent> pending_;
};

}  // namespace circnav
