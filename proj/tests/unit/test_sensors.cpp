#include "circnav/error.hpp"
#include "circnav/sensors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace circnav;

TEST(Vio, NoiseFreeDisplacement) {
  RngStream rng(1, streams::kVio);
  const VioMeasurement m = sense_vio(Vec2(1.0, 1.0), Vec2(0.9, 1.0), 0.3, VioNoise{}, rng);
  EXPECT_NEAR(m.delta.x(), 0.1, 1e-15);
  EXPECT_NEAR(m.delta.y(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.psi, 0.3);
}

TEST(Vio, StationaryAgentHasZeroDisplacement) {
  RngStream rng(1, streams::kVio);
  EXPECT_EQ(sense_vio(Vec2(2.0, 3.0), Vec2(2.0, 3.0), 0.0, VioNoise{}, rng).delta, Vec2::Zero());
}

TEST(Vio, NoiseIsZeroMean) {
  const double sigma = 0.02;
  RngStream rng(9, streams::kVio);
  Vec2 sum = Vec2::Zero();
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += sense_vio(Vec2(0.1, 0.0), Vec2::Zero(), 0.0, {sigma, 0.0}, rng).delta - Vec2(0.1, 0.0);
  const Vec2 mean = sum / n;
  EXPECT_LT(std::abs(mean.x()), 4.0 * sigma / 100.0);
  EXPECT_LT(std::abs(mean.y()), 4.0 * sigma / 100.0);
}

TEST(Vio, RelativeDisplacementSubtracts) {
  EXPECT_EQ(relative_displacement(Vec2(0.1, 0.0), Vec2(-0.1, 0.0)), Vec2(0.2, 0.0));
  EXPECT_EQ(relative_displacement(Vec2(0.4, 0.7), Vec2(0.4, 0.7)), Vec2::Zero());
}

TEST(Vio, RelativeDisplacementTelescopes) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.3);
  Vec2 pi(1.0, 2.0), pj(-1.0, 0.5);
  const Vec2 p0 = pi - pj;
  Vec2 sum = Vec2::Zero();
  RngStream vio(1, streams::kVio);
  for (int k = 0; k < 200; ++k) {
    const Vec2 ni = pi + Vec2(g(rng), g(rng)), nj = pj + Vec2(g(rng), g(rng));
    sum += relative_displacement(sense_vio(ni, pi, 0.0, {}, vio).delta, sense_vio(nj, pj, 0.0, {}, vio).delta);
    pi = ni;
    pj = nj;
  }
  EXPECT_NEAR((sum - ((pi - pj) - p0)).norm(), 0.0, 1e-12);
}

TEST(Uwb, NoiseFreeRangeIsEuclidean) {
  RngStream rng(1, streams::kUwbPair);
  EXPECT_DOUBLE_EQ(sense_uwb_raw(Vec2(3.0, 4.0), Vec2::Zero(), {}, rng).range, 5.0);
  EXPECT_DOUBLE_EQ(sense_uwb_raw(Vec2(1.0, 1.0), Vec2(1.0, 1.0), {}, rng).range, 0.0);
}

TEST(Uwb, OutlierFractionMatchesModel) {
  const UwbNoiseModel model{0.1, 0.02, 0.5, 3.0};
  RngStream rng(11, streams::kUwbPair);
  const int n = 100000;
  int outliers = 0;
  for (int i = 0; i < n; ++i) {
    const UwbSample s = sense_uwb_raw(Vec2(10.0, 0.0), Vec2::Zero(), model, rng);
    EXPECT_GE(s.range, 0.0);
    if (s.outlier) {
      ++outliers;
      const double offset = std::abs(s.range - 10.0);
      EXPECT_GE(offset, 0.5);
      EXPECT_LE(offset, 3.0);
    }
  }
  const double frac = static_cast<double>(outliers) / n;
  const double se = std::sqrt(0.02 * 0.98 / n);
  EXPECT_NEAR(frac, 0.02, 4.0 * se);
}

TEST(Uwb, JumpBeyondGateIsHeld) {
  UwbStreamState s = make_uwb_stream(0.9, 0.1, 0.005, 0.1);
  s.initialized = true;
  s.last_accepted = 5.0;
  const UwbPreprocessed p = preprocess_uwb(s, 5.5);
  EXPECT_TRUE(p.held);
  EXPECT_DOUBLE_EQ(p.value, 5.0);
}

TEST(Uwb, ExponentialSmoothing) {
  UwbStreamState s = make_uwb_stream(0.8, 1.0, 0.005, 0.1);
  s.initialized = true;
  s.last_accepted = 4.0;
  const UwbPreprocessed p = preprocess_uwb(s, 5.0);
  EXPECT_FALSE(p.held);
  EXPECT_NEAR(p.value, 4.2, 1e-15);
}

TEST(Uwb, EqualInputIsFixedPoint) {
  for (double beta : {0.0, 0.3, 0.9, 0.99}) {
    UwbStreamState s = make_uwb_stream(beta, 0.1, 0.005, 0.1);
    s.initialized = true;
    s.last_accepted = 2.75;
    EXPECT_DOUBLE_EQ(preprocess_uwb(s, 2.75).value, 2.75);
  }
}

TEST(Uwb, FirstSampleInitializesVerbatim) {
  const UwbPreprocessed p = preprocess_uwb(make_uwb_stream(0.9, 0.1, 0.005, 0.1), 12.0);
  EXPECT_FALSE(p.held);
  EXPECT_DOUBLE_EQ(p.value, 12.0);
  EXPECT_TRUE(p.state.initialized);
}

TEST(Uwb, AcceptedStepsAreBounded) {
  const double beta = 0.9, sigma_star = 0.1;
  UwbStream stream(make_uwb_stream(beta, sigma_star, 0.005, 0.1));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.5);
  double prev = stream.push(0, 3.0).smoothed;
  for (long n = 1; n < 5000; ++n) {
    const double v = stream.push(n, 3.0 + g(rng)).smoothed;
    EXPECT_LE(std::abs(v - prev), 3.0 * sigma_star * (1.0 - beta) + 1e-12);
    prev = v;
  }
}

TEST(Uwb, DownsampleEmitsOnMultiples) {
  const UwbStreamState s = make_uwb_stream(0.9, 0.1, 0.005, 0.1);
  EXPECT_EQ(s.substeps_per_sample, 20);
  EXPECT_TRUE(downsample_uwb(s, 20).has_value());
  EXPECT_FALSE(downsample_uwb(s, 19).has_value());
  int count = 0;
  for (long n = 1; n <= 200; ++n) count += downsample_uwb(s, n).has_value() ? 1 : 0;
  EXPECT_EQ(count, 10);
}

TEST(Uwb, StreamRejectsBadParameters) {
  EXPECT_THROW(make_uwb_stream(1.0, 0.1, 0.005, 0.1), ConfigError);
  EXPECT_THROW(make_uwb_stream(0.5, 0.0, 0.005, 0.1), ConfigError);
  EXPECT_THROW(make_uwb_stream(0.5, 0.1, 0.03, 0.1), ConfigError);
}

namespace {

CameraConfig identity_camera(const Mat3& mount) {
  CameraConfig c;
  c.K = Mat3::Identity();
  c.R_C = mount;
  c.T_C = Vec3::Zero();
  return c;
}

}  // namespace

TEST(Stereo, BoresightTargetProjectsToPrincipalPoint) {
  const CameraConfig cam = identity_camera(CameraConfig::forward_mount());
  const AgentState agent{1, Vec2::Zero(), Vec2::Zero(), 0.0, true};
  const auto px = sense_stereo(agent, TargetState{Vec2(2.0, 0.0), Vec2::Zero()}, cam, {}, nullptr);
  ASSERT_TRUE(px.has_value());
  EXPECT_NEAR(px->u, 0.0, 1e-15);
  EXPECT_NEAR(px->v, 0.0, 1e-15);
  EXPECT_NEAR(px->depth, 2.0, 1e-15);
}

TEST(Stereo, OccludedTargetIsNotObserved) {
  const CameraConfig cam = identity_camera(CameraConfig::forward_mount());
  const AgentState agent{1, Vec2::Zero(), Vec2::Zero(), 0.0, true};
  const std::vector<ObstacleSegment> wall{{Vec2(1.0, -1.0), Vec2(1.0, 1.0)}};
  EXPECT_FALSE(sense_stereo(agent, TargetState{Vec2(2.0, 0.0), Vec2::Zero()}, cam, wall, nullptr).has_value());
}

TEST(Stereo, TargetOutsideFrustumIsNotObserved) {
  const CameraConfig cam = CameraConfig::forward_looking();
  const AgentState agent{1, Vec2::Zero(), Vec2::Zero(), 0.0, true};
  EXPECT_FALSE(sense_stereo(agent, TargetState{Vec2(-2.0, 0.0), Vec2::Zero()}, cam, {}, nullptr).has_value());
  EXPECT_FALSE(sense_stereo(agent, TargetState{Vec2(1.0, 2.0), Vec2::Zero()}, cam, {}, nullptr).has_value());
  EXPECT_FALSE(sense_stereo(agent, TargetState{Vec2(20.0, 0.0), Vec2::Zero()}, cam, {}, nullptr).has_value());
}

TEST(Stereo, BackprojectIdentityChain) {
  const CameraConfig cam = identity_camera(Mat3::Identity());
  const PixelObservation px{0.0, 0.0, 2.0};
  EXPECT_EQ(camera_point(px, cam), Vec3(0.0, 0.0, 2.0));
  for (double psi : {0.0, std::numbers::pi / 2}) {
    const TargetObservation q = backproject(px, psi, cam);
    ASSERT_TRUE(q.visible());
    EXPECT_NEAR(q.q->norm(), 0.0, 1e-15);
  }
}

TEST(Stereo, BackprojectRejectsNonPositiveDepth) {
  try {
    backproject({0.0, 0.0, 0.0}, 0.0, CameraConfig::forward_looking());
    FAIL() << "expected invalid_depth";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_depth);
  }
}

TEST(Stereo, NoiseFreeRoundTripRecoversRelativePosition) {
  const CameraConfig cam = CameraConfig::forward_looking();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-4.0, 4.0), yaw(-3.1, 3.1);
  int checked = 0;
  for (int i = 0; i < 5000; ++i) {
    const AgentState agent{1, Vec2(u(rng), u(rng)), Vec2::Zero(), yaw(rng), true};
    const TargetState target{Vec2(u(rng), u(rng)), Vec2::Zero()};
    const auto px = sense_stereo(agent, target, cam, {}, nullptr);
    if (!px) continue;
    ++checked;
    const TargetObservation q = backproject(*px, agent.psi, cam);
    EXPECT_LE((*q.q - (agent.p - target.p)).norm(), 1e-9);
  }
  EXPECT_GT(checked, 100);
}

TEST(Stereo, VisibilityIsPureFunctionOfGeometry) {
  const CameraConfig cam = CameraConfig::forward_looking();
  const std::vector<ObstacleSegment> wall{{Vec2(1.0, -0.2), Vec2(1.0, 0.2)}};
  const AgentState agent{1, Vec2::Zero(), Vec2::Zero(), 0.1, true};
  const TargetState target{Vec2(2.0, 0.1), Vec2::Zero()};
  RngStream a(1, streams::kCamera), b(2, streams::kCamera);
  const bool clean = sense_stereo(agent, target, cam, wall, nullptr).has_value();
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(sense_stereo(agent, target, cam, wall, &a).has_value(), clean);
    EXPECT_EQ(sense_stereo(agent, target, cam, wall, &b).has_value(), clean);
  }
}
