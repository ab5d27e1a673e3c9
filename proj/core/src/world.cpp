#include "circnav/world.hpp"

#include "circnav/error.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace circnav {

MotionProfile MotionProfile::stationary() { return MotionProfile{}; }

MotionProfile MotionProfile::waypoint_path(std::vector<Vec2> waypoints, double speed, bool loop) {
  if (waypoints.size() < 2) {
    throw Error(ErrorKind::configuration, "waypoint path needs at least two waypoints");
  }
  if (!(speed >= 0.0) || !std::isfinite(speed)) {
    throw Error(ErrorKind::configuration, "waypoint speed must be finite and non-negative");
  }
  MotionProfile m;
  m.kind_ = Kind::waypoint_path;
  m.waypoints_ = std::move(waypoints);
  m.speed_ = speed;
  m.loop_ = loop;
  return m;
}

MotionProfile MotionProfile::scripted_velocity(std::vector<VelocityKey> table) {
  if (table.empty()) throw Error(ErrorKind::configuration, "velocity table is empty");
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (!(table[i].t > table[i - 1].t)) {
      throw Error(ErrorKind::configuration, "velocity table times must be strictly increasing");
    }
  }
  for (const auto& key : table) {
    if (!key.v.allFinite()) throw Error(ErrorKind::configuration, "velocity table has non-finite entry");
  }
  MotionProfile m;
  m.kind_ = Kind::scripted_velocity;
  m.table_ = std::move(table);
  return m;
}

Vec2 MotionProfile::velocity_at(double t) const {
  switch (kind_) {
    case Kind::stationary:
      return Vec2::Zero();
    case Kind::scripted_velocity: {
      Vec2 v = Vec2::Zero();
      for (const auto& key : table_) {
        if (key.t <= t) v = key.v;
      }
      return v;
    }
    case Kind::waypoint_path: {
      std::vector<std::pair<Vec2, Vec2>> segments;
      for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
        segments.emplace_back(waypoints_[i], waypoints_[i + 1]);
      }
      if (loop_) segments.emplace_back(waypoints_.back(), waypoints_.front());
      double total = 0.0;
      for (const auto& [a, b] : segments) total += (b - a).norm();
      if (total <= 0.0 || speed_ == 0.0) return Vec2::Zero();
      double s = speed_ * std::max(t, 0.0);
      if (loop_) {
        s = std::fmod(s, total);
      } else if (s >= total) {
        return Vec2::Zero();
      }
      for (const auto& [a, b] : segments) {
        const double len = (b - a).norm();
        if (s < len) return speed_ * (b - a) / len;
        s -= len;
      }
      return Vec2::Zero();
    }
  }
  return Vec2::Zero();
}

ProcessNoise::ProcessNoise(const Vec4& stddev, std::uint64_t seed, std::uint64_t stream_id)
    : stddev_(stddev), rng_(seed, stream_id) {}

Vec4 ProcessNoise::sample() {
  Vec4 w;
  for (int i = 0; i < 4; ++i) w(i) = rng_.gaussian(stddev_(i));
  return w;
}

TargetState step_target(const TargetState& s, const MotionProfile& profile, double t_next, double dt,
                        const Vec4& omega) {
  if (!(dt > 0.0)) throw Error(ErrorKind::invalid_state, "step_target: dt must be positive");
  if (!s.p.allFinite() || !s.v.allFinite() || !omega.allFinite()) {
    throw Error(ErrorKind::invalid_state, "step_target: non-finite target state");
  }
  TargetState next;
  next.p = s.p + dt * s.v + omega.head<2>();
  next.v = profile.velocity_at(t_next) + omega.tail<2>();
  return next;
}

AgentState step_agent(const AgentState& s, const Vec2& u, double dt, const Vec4& omega) {
  if (!(dt > 0.0)) throw Error(ErrorKind::invalid_state, "step_agent: dt must be positive");
  if (!s.alive) return s;
  if (!u.allFinite()) throw Error(ErrorKind::invalid_control, "step_agent: non-finite control");
  if (!s.p.allFinite() || !s.v.allFinite() || !std::isfinite(s.psi)) {
    throw Error(ErrorKind::invalid_state, "step_agent: non-finite agent state");
  }
  AgentState next = s;
  next.p = s.p + dt * s.v + omega.head<2>();
  next.v = s.v + dt * u + omega.tail<2>();
  return next;
}

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool within_box(const Vec2& a, const Vec2& b, const Vec2& c) {
  return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
}

bool lex_less(const Vec2& a, const Vec2& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

// Closed-segment intersection, touching included.
bool segments_touch(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && within_box(q1, q2, p1)) return true;
  if (d2 == 0 && within_box(q1, q2, p2)) return true;
  if (d3 == 0 && within_box(p1, p2, q1)) return true;
  if (d4 == 0 && within_box(p1, p2, q2)) return true;
  return false;
}

}  // namespace

bool line_of_sight(const Vec2& a, const Vec2& b, std::span<const ObstacleSegment> obstacles) {
  // Canonical endpoint order keeps the predicate bitwise symmetric.
  const bool swap = lex_less(b, a);
  const Vec2& p1 = swap ? b : a;
  const Vec2& p2 = swap ? a : b;
  for (const auto& ob : obstacles) {
    const bool oswap = lex_less(ob.b, ob.a);
    const Vec2& q1 = oswap ? ob.b : ob.a;
    const Vec2& q2 = oswap ? ob.a : ob.b;
    if (segments_touch(p1, p2, q1, q2)) return false;
  }
  return true;
}

World::World(std::vector<AgentState> agents, TargetState target, MotionProfile profile,
             std::vector<ObstacleSegment> obstacles, double dt, const WorldNoise& noise,
             std::uint64_t seed)
    : agents_(std::move(agents)),
      target_(target),
      profile_(std::move(profile)),
      obstacles_(std::move(obstacles)),
      dt_(dt),
      target_noise_(noise.target_stddev, seed, streams::kTargetProcess) {
  if (!(dt_ > 0.0)) throw Error(ErrorKind::configuration, "world dt must be positive");
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    agents_[i].id = static_cast<int>(i) + 1;
    agents_[i].psi = wrap_pi(agents_[i].psi);
    agent_noise_.emplace_back(noise.agent_stddev, seed, streams::kAgentProcess + i);
  }
  for (const auto& ob : obstacles_) {
    if (ob.a == ob.b) throw Error(ErrorKind::configuration, "obstacle segment endpoints coincide");
  }
}

const AgentState& World::agent(int id) const {
  if (id < 1 || id > static_cast<int>(agents_.size())) {
    throw Error(ErrorKind::configuration, "unknown agent id " + std::to_string(id));
  }
  return agents_[static_cast<std::size_t>(id - 1)];
}

void World::inject_failure(int agent_id, double t_fail) {
  const AgentState& a = agent(agent_id);
  if (!a.alive) {
    throw Error(ErrorKind::configuration, "agent " + std::to_string(agent_id) + " is already dead");
  }
  pending_.push_back({agent_id, t_fail});
  std::stable_sort(pending_.begin(), pending_.end(),
                   [](const FailureEvent& x, const FailureEvent& y) { return x.t_fail < y.t_fail; });
}

std::vector<int> World::apply_due_failures() {
  std::vector<int> died;
  const double t = time();
  // Small tolerance so a t_fail on a step boundary survives rounding of k*dt.
  auto due = [&](const FailureEvent& e) { return t + 1e-9 * dt_ >= e.t_fail; };
  while (!pending_.empty() && due(pending_.front())) {
    auto& a = agents_[static_cast<std::size_t>(pending_.front().agent_id - 1)];
    if (a.alive) {
      a.alive = false;
      died.push_back(a.id);
    }
    pending_.erase(pending_.begin());
  }
  return died;
}

void World::step(std::span<const Vec2> u, std::span<const double> yaw_rate) {
  if (u.size() != agents_.size() || yaw_rate.size() != agents_.size()) {
    throw Error(ErrorKind::invalid_control, "World::step: one control per agent required");
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    // Draw even for dead agents so streams stay aligned with step index.
    const Vec4 omega = agent_noise_[i].sample();
    if (!agents_[i].alive) continue;
    if (!std::isfinite(yaw_rate[i])) {
      throw Error(ErrorKind::invalid_control, "World::step: non-finite yaw command");
    }
    agents_[i] = step_agent(agents_[i], u[i], dt_, omega);
    agents_[i].psi = wrap_pi(agents_[i].psi + yaw_rate[i]);
  }
  const Vec4 omega0 = target_noise_.sample();
  ++k_;
  target_ = step_target(target_, profile_, time(), dt_, omega0);
}

std::vector<int> World::alive_ids() const {
  std::vector<int> ids;
  for (const auto& a : agents_) {
    if (a.alive) ids.push_back(a.id);
  }
  return ids;
}

}  // namespace circnav
