#pragma once

#include "circnav/linalg.hpp"
#include "circnav/relative_estimator.hpp"

#include <optional>
#include <span>
#include <string_view>

namespace circnav {

/// Agent-target relative state x_i0 = [p_i - p_0; v_i - v_0].
struct TargetEstimate {
  Vec4 x = Vec4::Zero();
  Mat4 P = Mat4::Identity();

  Vec2 position() const { return x.head<2>(); }
  Vec2 velocity() const { return x.tail<2>(); }
};

/// What agent j shares about the target at one step.
struct NeighborPacket {
  int sender = 0;
  long step = 0;
  std::optional<Vec2> q;  // present iff j sees the target
  Mat2 sigma_q = Mat2::Identity();
  std::optional<Vec4> x_bar;  // present once j's filter is running
  Mat4 P_minus = Mat4::Identity();
};

/// A packet paired with agent i's relative estimate for (i, sender).
struct NeighborInput {
  NeighborPacket packet;
  RelativeEstimate relative;
};

enum class FusionMode { direct, indirect, none };

std::string_view to_string(FusionMode mode);

struct FusedMeasurement {
  Vec2 z = Vec2::Zero();
  Mat2 sigma = Mat2::Identity();
  FusionMode mode = FusionMode::none;
};

struct DirectMeasurement {
  Vec2 q = Vec2::Zero();
  Mat2 sigma = Mat2::Identity();
};

struct IndirectMeasurement {
  Vec2 z = Vec2::Zero();
  Mat2 sigma = Mat2::Identity();
};

/// z = q_j0 + p_hat_ij, Sigma = Sigma_q_j + C P_ij C^T. Throws precondition
/// if the packet carries no measurement.
IndirectMeasurement indirect_measurement(const NeighborPacket& pkt, const RelativeEstimate& rel);

/// Own measurement if present, otherwise the mean of the neighbors' indirect
/// measurements with covariance (1/|O|^2) * sum Sigma_j, otherwise none.
FusedMeasurement fuse_event_triggered(const std::optional<DirectMeasurement>& own,
                                      std::span<const NeighborInput> neighbors);

/// x_bar = A x + B u_i; P- = A P A^T + Q_i0.
TargetEstimate dkf_predict(const TargetEstimate& est, const Vec2& u_i_km1, const Mat4& Q_i0, double dt);

struct NeighborPrior {
  Vec4 x = Vec4::Zero();
  Mat4 P = Mat4::Identity();
};

/// Neighbor j's prior re-expressed for agent i: x_bar_j0 + x_hat_ij with
/// covariance P-_j0 + P+_ij. Throws precondition if the packet has no prior.
NeighborPrior neighbor_prior(const NeighborPacket& pkt, const RelativeEstimate& rel);

/// Information-form update with measurement innovation and neighbor consensus.
/// With mode none only the consensus terms apply. Throws numerical_failure if
/// the information matrix cannot be inverted.
TargetEstimate dkf_update(const TargetEstimate& prior, const FusedMeasurement& fused,
                          std::span<const NeighborPrior> priors, double epsilon);

struct TargetEstimatorConfig {
  double epsilon = 0.1;
  Vec4 Q_rate_diag = Vec4(1e-4, 1e-4, 1e-2, 1e-2);  // Q_i0 = diag(.) * dt
  Vec4 P0_diag = Vec4(1.0, 1.0, 4.0, 4.0);
  Mat2 sigma_q = 0.0025 * Mat2::Identity();
  int max_prior_staleness = 1;  // steps

  Mat4 process_covariance(double dt) const;
};

/// Per-agent event-triggered DKF, initialized from its first usable
/// measurement.
class TargetFilter {
 public:
  TargetFilter() = default;
  TargetFilter(const TargetEstimatorConfig& cfg, double dt) : cfg_(cfg), dt_(dt) {}

  bool initialized() const { return initialized_; }

  /// Prediction for the current step; no-op before initialization.
  void predict(const Vec2& u_i_km1);

  /// Prior shared with neighbors (valid after predict()).
  const TargetEstimate& prior() const { return prior_; }
  const TargetEstimate& estimate() const { return estimate_; }

  /// Runs the measurement + consensus update and returns the mode used.
  FusionMode update(const std::optional<DirectMeasurement>& own, std::span<const NeighborInput> neighbors);

 private:
  TargetEstimatorConfig cfg_;
  double dt_ = 0.1;
  bool initialized_ = false;
  TargetEstimate prior_;
  TargetEstimate estimate_;
};

}  // namespace circnav
