#include "circnav/target_estimator.hpp"

#include "circnav/error.hpp"

#include <vector>

namespace circnav {

std::string_view to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::direct: return "direct";
    case FusionMode::indirect: return "indirect";
    case FusionMode::none: return "none";
  }
  return "none";
}

IndirectMeasurement indirect_measurement(const NeighborPacket& pkt, const RelativeEstimate& rel) {
  if (!pkt.q) {
    throw Error(ErrorKind::precondition, "indirect_measurement: packet carries no target measurement");
  }
  IndirectMeasurement m;
  m.z = *pkt.q + rel.position();
  m.sigma = symmetrized(pkt.sigma_q + rel.P.topLeftCorner<2, 2>());
  return m;
}

FusedMeasurement fuse_event_triggered(const std::optional<DirectMeasurement>& own,
                                      std::span<const NeighborInput> neighbors) {
  FusedMeasurement fused;
  if (own) {
    fused.z = own->q;
    fused.sigma = own->sigma;
    fused.mode = FusionMode::direct;
    return fused;
  }
  Vec2 z_sum = Vec2::Zero();
  Mat2 sigma_sum = Mat2::Zero();
  int count = 0;
  for (const auto& n : neighbors) {
    if (!n.packet.q) continue;
    const IndirectMeasurement m = indirect_measurement(n.packet, n.relative);
    z_sum += m.z;
    sigma_sum += m.sigma;
    ++count;
  }
  if (count == 0) return fused;
  const double c = static_cast<double>(count);
  fused.z = z_sum / c;
  fused.sigma = sigma_sum / (c * c);
  fused.mode = FusionMode::indirect;
  return fused;
}

TargetEstimate dkf_predict(const TargetEstimate& est, const Vec2& u_i_km1, const Mat4& Q_i0, double dt) {
  const Mat4 a = transition_matrix(dt);
  TargetEstimate out;
  out.x = a * est.x + input_matrix(dt) * u_i_km1;
  out.P = symmetrized(a * est.P * a.transpose() + Q_i0);
  return out;
}

NeighborPrior neighbor_prior(const NeighborPacket& pkt, const RelativeEstimate& rel) {
  if (!pkt.x_bar) {
    throw Error(ErrorKind::precondition, "neighbor_prior: packet carries no prior");
  }
  return NeighborPrior{*pkt.x_bar + rel.x, symmetrized(pkt.P_minus + rel.P)};
}

TargetEstimate dkf_update(const TargetEstimate& prior, const FusedMeasurement& fused,
                          std::span<const NeighborPrior> priors, double epsilon) {
  Mat4 info;
  if (!spd_inverse<4>(prior.P, info)) {
    throw Error(ErrorKind::numerical_failure, "dkf_update: prior covariance is singular");
  }
  const Mat24 c = position_selector();
  Mat2 sigma_inv = Mat2::Zero();
  const bool has_measurement = fused.mode != FusionMode::none;
  if (has_measurement) {
    if (!spd_inverse<2>(fused.sigma, sigma_inv)) {
      throw Error(ErrorKind::numerical_failure, "dkf_update: measurement covariance is singular");
    }
    info += c.transpose() * sigma_inv * c;
  }

  Vec4 consensus = Vec4::Zero();
  for (const auto& nb : priors) {
    Mat4 nb_info;
    if (!spd_inverse<4>(nb.P, nb_info)) continue;  // unusable neighbor, skip
    info += nb_info;
    consensus += nb_info * (nb.x - prior.x);
  }

  TargetEstimate post;
  if (!spd_inverse<4>(info, post.P)) {
    throw Error(ErrorKind::numerical_failure, "dkf_update: information matrix is singular");
  }
  post.x = prior.x + epsilon * post.P * consensus;
  if (has_measurement) {
    post.x += post.P * c.transpose() * sigma_inv * (fused.z - c * prior.x);
  }
  if (!post.x.allFinite()) throw Error(ErrorKind::numerical_failure, "dkf_update: non-finite estimate");
  return post;
}

Mat4 TargetEstimatorConfig::process_covariance(double dt) const {
  return Mat4(Q_rate_diag.asDiagonal()) * dt;
}

void TargetFilter::predict(const Vec2& u_i_km1) {
  if (!initialized_) return;
  prior_ = dkf_predict(estimate_, u_i_km1, cfg_.process_covariance(dt_), dt_);
}

FusionMode TargetFilter::update(const std::optional<DirectMeasurement>& own,
                                std::span<const NeighborInput> neighbors) {
  const FusedMeasurement fused = fuse_event_triggered(own, neighbors);
  if (!initialized_) {
    if (fused.mode == FusionMode::none) return fused.mode;
    estimate_.x.setZero();
    estimate_.x.head<2>() = fused.z;
    estimate_.P = cfg_.P0_diag.asDiagonal();
    prior_ = estimate_;
    initialized_ = true;
    return fused.mode;
  }
  std::vector<NeighborPrior> priors;
  for (const auto& n : neighbors) {
    if (n.packet.x_bar) priors.push_back(neighbor_prior(n.packet, n.relative));
  }
  estimate_ = dkf_update(prior_, fused, priors, cfg_.epsilon);
  return fused.mode;
}

}  // namespace circnav
