#pragma once

#include "circnav/linalg.hpp"

namespace circnav {

/// Inter-agent relative state x_ij = [p_i - p_j; v_i - v_j].
struct RelativeEstimate {
  Vec4 x = Vec4::Zero();
  Mat4 P = Mat4::Identity();

  Vec2 position() const { return x.head<2>(); }
  Vec2 velocity() const { return x.tail<2>(); }
};

struct EstimatorConfig {
  Mat4 Q = 0.0002 * Mat4::Identity();
  Mat3 sigma_star = Vec3(0.025, 0.002, 0.002).asDiagonal();
  Mat2 sigma_delta = 0.002 * Mat2::Identity();
  double a = 0.05;  // tanh schedule rate, 0 < a < 1
  double dt = 0.1;
  Vec4 P0_diag = Vec4(25.0, 25.0, 1.0, 1.0);

  RelativeEstimate initial_estimate() const;
};

/// Range-increment / displacement measurement quantities for one step.
struct RangeDisplacementMeasurement {
  double y = 0.0;           // 0.5 * (d_k^2 - d_{k-1}^2 - |delta|^2)
  Vec2 xi = Vec2::Zero();   // delta + dt^2 u_{k-1}
  Mat34 H = Mat34::Zero();  // [delta^T 0; 0 dt I]
};

struct MeasurementBundle {
  Vec3 z = Vec3::Zero();
  Mat34 H = Mat34::Zero();
  Mat3 sigma = Mat3::Identity();
};

/// Throws invalid_measurement on a negative or non-finite range.
RangeDisplacementMeasurement build_measurement(double d_k, double d_km1, const Vec2& delta_ij,
                                               const Vec2& u_ij_km1, double dt);

/// Measurement vector used against x_k. y itself is delta^T p_{k-1}; adding
/// |delta|^2 re-expresses it in terms of p_k so the row [delta^T 0 0] applies.
Vec3 aligned_measurement(const RangeDisplacementMeasurement& m, const Vec2& delta_ij);

/// Sigma_k = tanh(a k) * diag(p_bar^T Sigma_delta p_bar, 0, 0) + Sigma*.
Mat3 measurement_covariance(const Vec2& p_bar, long k, const EstimatorConfig& cfg);

/// x_bar = A x + B u; P- = A P A^T + Q.
RelativeEstimate predict(const RelativeEstimate& est, const Vec2& u_ij_km1, const EstimatorConfig& cfg);

/// Kalman correction with the Joseph-form covariance update. Throws
/// numerical_failure when the innovation covariance cannot be inverted.
RelativeEstimate correct(const RelativeEstimate& prior, const MeasurementBundle& m);

/// Joseph form (I - K H) P (I - K H)^T + K Sigma K^T for an arbitrary gain.
Mat4 joseph_update(const Mat4& P, const Mat34& H, const Eigen::Matrix<double, 4, 3>& K,
                   const Mat3& sigma);

/// Inputs for one pair step k.
struct PairStepInputs {
  double d_k = 0.0;
  double d_km1 = 0.0;
  Vec2 delta_ij = Vec2::Zero();
  Vec2 u_ij_km1 = Vec2::Zero();
  long k = 0;
};

/// predict -> build measurement -> inflated covariance (from the prior p_bar)
/// -> correct.
RelativeEstimate step_modified_kf(const RelativeEstimate& est, const PairStepInputs& in,
                                  const EstimatorConfig& cfg);

/// Same pipeline with the measurement covariance fixed at Sigma*.
RelativeEstimate step_classical_kf(const RelativeEstimate& est, const PairStepInputs& in,
                                   const EstimatorConfig& cfg);

/// Exponentially-forgetting recursive least squares on the range-increment
/// row, with the position carried forward by the measured displacement.
class RlsEstimator {
 public:
  explicit RlsEstimator(double forgetting = 0.98, double initial_gain = 100.0);

  void step(const PairStepInputs& in, double dt);

  void reset_position(const Vec2& p) { p_ = p; }

  Vec2 position() const { return p_; }
  Vec2 velocity() const { return v_; }
  const Mat2& gain_matrix() const { return P_; }
  double forgetting() const { return lambda_; }

 private:
  double lambda_;
  Vec2 p_ = Vec2::Zero();
  Vec2 v_ = Vec2::Zero();
  Mat2 P_;
};

}  // namespace circnav
