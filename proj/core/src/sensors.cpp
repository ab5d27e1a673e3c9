#include "circnav/sensors.hpp"

#include "circnav/error.hpp"

#include <cmath>

namespace circnav {

VioMeasurement sense_vio(const Vec2& p_k, const Vec2& p_km1, double psi_true, const VioNoise& noise,
                         RngStream& rng) {
  VioMeasurement m;
  m.delta = p_k - p_km1;
  m.delta.x() += rng.gaussian(noise.displacement_std);
  m.delta.y() += rng.gaussian(noise.displacement_std);
  m.psi = wrap_pi(psi_true + rng.gaussian(noise.yaw_std));
  return m;
}

Vec2 relative_displacement(const Vec2& delta_i, const Vec2& delta_j) { return delta_i - delta_j; }

UwbSample sense_uwb_raw(const Vec2& p_i, const Vec2& p_j, const UwbNoiseModel& noise, RngStream& rng) {
  UwbSample s;
  const double truth = (p_i - p_j).norm();
  double mu = 0.0;
  if (noise.p_outlier > 0.0 && rng.bernoulli(noise.p_outlier)) {
    s.outlier = true;
    const double magnitude = rng.uniform(noise.outlier_min, noise.outlier_max);
    mu = rng.bernoulli(0.5) ? magnitude : -magnitude;
  } else {
    mu = rng.gaussian(noise.sigma);
  }
  s.range = std::max(0.0, truth + mu);
  return s;
}

UwbStreamState make_uwb_stream(double beta, double sigma_star, double dt_uwb, double dt) {
  std::vector<ConfigError::Issue> issues;
  if (!(beta >= 0.0 && beta < 1.0)) issues.push_back({"sensors.uwb.beta", "must lie in [0, 1)"});
  if (!(sigma_star > 0.0)) issues.push_back({"sensors.uwb.sigma_star", "must be positive"});
  if (!(dt_uwb > 0.0)) issues.push_back({"sensors.uwb.rate_hz", "must be positive"});
  long substeps = 0;
  if (dt_uwb > 0.0 && dt > 0.0) {
    const double ratio = dt / dt_uwb;
    substeps = std::lround(ratio);
    if (substeps < 1 || std::abs(ratio - static_cast<double>(substeps)) > 1e-9 * ratio) {
      issues.push_back({"sensors.uwb.rate_hz", "UWB period must divide the step exactly"});
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  UwbStreamState s;
  s.beta = beta;
  s.sigma_star = sigma_star;
  s.dt_uwb = dt_uwb;
  s.dt = dt;
  s.substeps_per_sample = substeps;
  return s;
}

UwbPreprocessed preprocess_uwb(const UwbStreamState& state, double d_raw) {
  UwbPreprocessed out;
  out.state = state;
  if (!state.initialized) {
    out.state.initialized = true;
    out.state.last_accepted = d_raw;
  } else if (std::abs(d_raw - state.last_accepted) <= 3.0 * state.sigma_star) {
    out.state.last_accepted = state.beta * state.last_accepted + (1.0 - state.beta) * d_raw;
  } else {
    out.held = true;
  }
  out.value = out.state.last_accepted;
  return out;
}

std::optional<double> downsample_uwb(const UwbStreamState& state, long n) {
  if (state.substeps_per_sample > 0 && n % state.substeps_per_sample == 0) {
    return state.last_accepted;
  }
  return std::nullopt;
}

UwbStream::Output UwbStream::push(long n, double d_raw) {
  const UwbPreprocessed p = preprocess_uwb(state_, d_raw);
  state_ = p.state;
  return Output{p.value, p.held, downsample_uwb(state_, n)};
}

Mat3 CameraConfig::forward_mount() {
  Mat3 r;
  // columns: optical x -> -body y, optical y -> -body z, optical z -> body x
  r << 0, 0, 1,
      -1, 0, 0,
      0, -1, 0;
  return r;
}

CameraConfig CameraConfig::forward_looking() {
  CameraConfig c;
  c.K << 385.0, 0.0, 320.0,
         0.0, 385.0, 240.0,
         0.0, 0.0, 1.0;
  c.R_C = forward_mount();
  c.T_C = Vec3(0.08, 0.0, 0.02);
  c.fov_half_angle = 45.0 * std::numbers::pi / 180.0;
  c.max_depth = 10.0;
  c.pixel_noise_std = 2.0;
  c.depth_noise_std = 0.05;
  return c;
}

void CameraConfig::validate() const {
  std::vector<ConfigError::Issue> issues;
  if (!K.allFinite() || std::abs(K.determinant()) < 1e-12) {
    issues.push_back({"sensors.camera.K", "intrinsic matrix must be invertible"});
  }
  if (!R_C.allFinite() || (R_C.transpose() * R_C - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(R_C.determinant() - 1.0) > 1e-9) {
    issues.push_back({"sensors.camera.R_C", "mounting rotation must be orthonormal with det +1"});
  }
  if (!(fov_half_angle > 0.0 && fov_half_angle < std::numbers::pi / 2)) {
    issues.push_back({"sensors.camera.fov_half_angle_deg", "must lie in (0, 90) degrees"});
  }
  if (!(max_depth > 0.0)) issues.push_back({"sensors.camera.max_depth", "must be positive"});
  if (!(pixel_noise_std >= 0.0)) issues.push_back({"sensors.camera.pixel_noise_std", "must be >= 0"});
  if (!(depth_noise_std >= 0.0)) issues.push_back({"sensors.camera.depth_noise_std", "must be >= 0"});
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::optional<PixelObservation> sense_stereo(const AgentState& agent, const TargetState& target,
                                             const CameraConfig& cfg,
                                             std::span<const ObstacleSegment> obstacles,
                                             RngStream* rng) {
  if (!agent.alive) return std::nullopt;
  if (!line_of_sight(agent.p, target.p, obstacles)) return std::nullopt;

  const Vec2 to_target = target.p - agent.p;
  const Vec3 world_vec(to_target.x(), to_target.y(), 0.0);
  const Vec3 body = yaw_rotation(agent.psi).transpose() * world_vec;
  const Vec3 optical = cfg.R_C.transpose() * (body - cfg.T_C);
  if (!(optical.z() > 0.0)) return std::nullopt;
  const double off_axis = std::atan2(optical.head<2>().norm(), optical.z());
  if (off_axis > cfg.fov_half_angle) return std::nullopt;

  const Vec3 h = cfg.K * optical;
  const double depth = h.z();
  if (!(depth > 0.0) || depth > cfg.max_depth) return std::nullopt;

  PixelObservation px{h.x() / depth, h.y() / depth, depth};
  if (rng != nullptr) {
    px.u += rng->gaussian(cfg.pixel_noise_std);
    px.v += rng->gaussian(cfg.pixel_noise_std);
    px.depth += rng->gaussian(cfg.depth_noise_std);
    if (!(px.depth > 0.0)) return std::nullopt;
  }
  return px;
}

Vec3 camera_point(const PixelObservation& pixel, const CameraConfig& cfg) {
  const Vec3 uv1(pixel.u, pixel.v, 1.0);
  return cfg.R_C * cfg.K.inverse() * uv1 * pixel.depth + cfg.T_C;
}

TargetObservation backproject(const PixelObservation& pixel, double psi, const CameraConfig& cfg) {
  if (!(pixel.depth > 0.0)) {
    throw Error(ErrorKind::invalid_depth, "backproject: depth must be positive");
  }
  const Vec3 local = yaw_rotation(psi) * camera_point(pixel, cfg);
  // The chain yields the agent->target vector; q is target->agent.
  return TargetObservation{Vec2(-local.x(), -local.y())};
}

}  // namespace circnav
