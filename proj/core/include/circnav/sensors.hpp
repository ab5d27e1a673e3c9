#pragma once

#include "circnav/linalg.hpp"
#include "circnav/random.hpp"
#include "circnav/world.hpp"

#include <optional>
#include <span>

namespace circnav {

// ---------------------------------------------------------------------------
// VIO

struct VioMeasurement {
  Vec2 delta = Vec2::Zero();  // displacement over one step
  double psi = 0.0;
};

struct VioNoise {
  double displacement_std = 0.0;  // per axis, per agent
  double yaw_std = 0.0;
};

VioMeasurement sense_vio(const Vec2& p_k, const Vec2& p_km1, double psi_true, const VioNoise& noise,
                         RngStream& rng);

/// delta_ij = delta_i - delta_j.
Vec2 relative_displacement(const Vec2& delta_i, const Vec2& delta_j);

// ---------------------------------------------------------------------------
// UWB

/// Gaussian core contaminated by uniform outliers of random sign.
struct UwbNoiseModel {
  double sigma = 0.0;
  double p_outlier = 0.0;
  double outlier_min = 0.5;
  double outlier_max = 3.0;
};

struct UwbSample {
  double range = 0.0;
  bool outlier = false;
};

/// Raw range ||p_i - p_j|| + noise, clamped at zero.
UwbSample sense_uwb_raw(const Vec2& p_i, const Vec2& p_j, const UwbNoiseModel& noise, RngStream& rng);

struct UwbStreamState {
  double last_accepted = 0.0;
  bool initialized = false;
  double beta = 0.0;
  double sigma_star = 0.1;
  double dt_uwb = 0.005;
  double dt = 0.1;
  long substeps_per_sample = 20;
};

/// Validates the parameters (integer substeps, 0 <= beta < 1, sigma* > 0).
UwbStreamState make_uwb_stream(double beta, double sigma_star, double dt_uwb, double dt);

struct UwbPreprocessed {
  UwbStreamState state;
  double value = 0.0;
  bool held = false;  // rejected by the three-sigma gate
};

/// Three-sigma gate followed by exponential smoothing. The first sample
/// initializes the stream verbatim.
UwbPreprocessed preprocess_uwb(const UwbStreamState& state, double d_raw);

/// Emits the smoothed value when n is a multiple of the substep count.
std::optional<double> downsample_uwb(const UwbStreamState& state, long n);

/// Convenience wrapper owning a stream and its substep counter.
class UwbStream {
 public:
  UwbStream() = default;
  explicit UwbStream(const UwbStreamState& params) : state_(params) {}

  struct Output {
    double smoothed = 0.0;
    bool held = false;
    std::optional<double> emitted;
  };

  /// Feeds sample number n (n = 0 for the initializing sample).
  Output push(long n, double d_raw);

  const UwbStreamState& state() const { return state_; }

 private:
  UwbStreamState state_;
};

// ---------------------------------------------------------------------------
// Stereo camera

struct CameraConfig {
  Mat3 K = Mat3::Identity();
  Mat3 R_C = Mat3::Identity();  // optical frame -> body frame
  Vec3 T_C = Vec3::Zero();      // camera origin in the body frame
  double fov_half_angle = 0.7853981633974483;
  double max_depth = 10.0;
  double pixel_noise_std = 0.0;
  double depth_noise_std = 0.0;

  /// Forward-looking mount (optical z along body x, image x to the right,
  /// image y down) with a 640x480 pinhole.
  static CameraConfig forward_looking();
  static Mat3 forward_mount();

  /// Throws ConfigError if K is singular or R_C is not a proper rotation.
  void validate() const;
};

struct PixelObservation {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

struct TargetObservation {
  std::optional<Vec2> q;  // p_i - p_0, world-aligned
  bool visible() const { return q.has_value(); }
};

/// Projects the target into the agent's camera. Empty when the target is
/// occluded, outside the field of view, behind the camera, or too far.
/// rng == nullptr means noise-free.
std::optional<PixelObservation> sense_stereo(const AgentState& agent, const TargetState& target,
                                             const CameraConfig& cfg,
                                             std::span<const ObstacleSegment> obstacles,
                                             RngStream* rng);

/// Pixel + depth -> relative position p_i - p_0 in the world-aligned frame.
/// Throws invalid_depth for D <= 0.
TargetObservation backproject(const PixelObservation& pixel, double psi, const CameraConfig& cfg);

/// Camera-frame point of the back-projection chain before the yaw rotation.
Vec3 camera_point(const PixelObservation& pixel, const CameraConfig& cfg);

}  // namespace circnav
