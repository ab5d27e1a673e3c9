#include "circnav/relative_estimator.hpp"

#include "circnav/error.hpp"

#include <cmath>

namespace circnav {

RelativeEstimate EstimatorConfig::initial_estimate() const {
  RelativeEstimate e;
  e.x.setZero();
  e.P = P0_diag.asDiagonal();
  return e;
}

RangeDisplacementMeasurement build_measurement(double d_k, double d_km1, const Vec2& delta_ij,
                                               const Vec2& u_ij_km1, double dt) {
  if (!(d_k >= 0.0) || !(d_km1 >= 0.0) || !std::isfinite(d_k) || !std::isfinite(d_km1)) {
    throw Error(ErrorKind::invalid_measurement, "build_measurement: ranges must be finite and >= 0");
  }
  RangeDisplacementMeasurement m;
  m.y = 0.5 * (d_k * d_k - d_km1 * d_km1 - delta_ij.squaredNorm());
  m.xi = delta_ij + dt * dt * u_ij_km1;
  m.H.setZero();
  m.H(0, 0) = delta_ij.x();
  m.H(0, 1) = delta_ij.y();
  m.H(1, 2) = dt;
  m.H(2, 3) = dt;
  return m;
}

Vec3 aligned_measurement(const RangeDisplacementMeasurement& m, const Vec2& delta_ij) {
  return Vec3(m.y + delta_ij.squaredNorm(), m.xi.x(), m.xi.y());
}

Mat3 measurement_covariance(const Vec2& p_bar, long k, const EstimatorConfig& cfg) {
  Mat3 sigma = cfg.sigma_star;
  const double weight = std::tanh(cfg.a * static_cast<double>(k));
  sigma(0, 0) += weight * p_bar.dot(cfg.sigma_delta * p_bar);
  return sigma;
}

RelativeEstimate predict(const RelativeEstimate& est, const Vec2& u_ij_km1, const EstimatorConfig& cfg) {
  const Mat4 a = transition_matrix(cfg.dt);
  RelativeEstimate out;
  out.x = a * est.x + input_matrix(cfg.dt) * u_ij_km1;
  out.P = symmetrized(a * est.P * a.transpose() + cfg.Q);
  return out;
}

Mat4 joseph_update(const Mat4& P, const Mat34& H, const Eigen::Matrix<double, 4, 3>& K,
                   const Mat3& sigma) {
  const Mat4 ikh = Mat4::Identity() - K * H;
  return symmetrized(ikh * P * ikh.transpose() + K * sigma * K.transpose());
}

RelativeEstimate correct(const RelativeEstimate& prior, const MeasurementBundle& m) {
  const Mat3 s = m.H * prior.P * m.H.transpose() + m.sigma;
  Mat3 s_inv;
  if (!spd_inverse<3>(s, s_inv)) {
    throw Error(ErrorKind::numerical_failure, "correct: innovation covariance is singular");
  }
  const Eigen::Matrix<double, 4, 3> gain = prior.P * m.H.transpose() * s_inv;
  RelativeEstimate post;
  post.x = prior.x + gain * (m.z - m.H * prior.x);
  post.P = joseph_update(prior.P, m.H, gain, m.sigma);
  if (!post.x.allFinite() || !post.P.allFinite()) {
    throw Error(ErrorKind::numerical_failure, "correct: non-finite posterior");
  }
  return post;
}

namespace {

RelativeEstimate step_kf(const RelativeEstimate& est, const PairStepInputs& in, const EstimatorConfig& cfg,
                         bool inflate) {
  const RelativeEstimate prior = predict(est, in.u_ij_km1, cfg);
  const RangeDisplacementMeasurement meas =
      build_measurement(in.d_k, in.d_km1, in.delta_ij, in.u_ij_km1, cfg.dt);
  MeasurementBundle bundle;
  bundle.z = aligned_measurement(meas, in.delta_ij);
  bundle.H = meas.H;
  bundle.sigma = inflate ? measurement_covariance(prior.position(), in.k, cfg) : cfg.sigma_star;
  return correct(prior, bundle);
}

}  // namespace

RelativeEstimate step_modified_kf(const RelativeEstimate& est, const PairStepInputs& in,
                                  const EstimatorConfig& cfg) {
  return step_kf(est, in, cfg, true);
}

RelativeEstimate step_classical_kf(const RelativeEstimate& est, const PairStepInputs& in,
                                   const EstimatorConfig& cfg) {
  return step_kf(est, in, cfg, false);
}

RlsEstimator::RlsEstimator(double forgetting, double initial_gain) : lambda_(forgetting) {
  if (!(forgetting > 0.0 && forgetting <= 1.0)) {
    throw Error(ErrorKind::configuration, "RLS forgetting factor must lie in (0, 1]");
  }
  P_ = initial_gain * Mat2::Identity();
}

void RlsEstimator::step(const PairStepInputs& in, double dt) {
  const RangeDisplacementMeasurement meas =
      build_measurement(in.d_k, in.d_km1, in.delta_ij, in.u_ij_km1, dt);
  const double target = aligned_measurement(meas, in.delta_ij).x();
  v_ = meas.xi / dt;
  p_ += in.delta_ij;

  const Vec2& phi = in.delta_ij;
  const double denom = lambda_ + phi.dot(P_ * phi);
  if (!(denom > kConditioningFloor) || !std::isfinite(denom)) return;
  const Vec2 gain = P_ * phi / denom;
  p_ += gain * (target - phi.dot(p_));
  P_ = symmetrized((P_ - gain * phi.transpose() * P_) / lambda_);
}

}  // namespace circnav
