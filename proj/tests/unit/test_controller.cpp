#include "circnav/controller.hpp"
#include "circnav/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace circnav;

namespace {

constexpr double kPi = std::numbers::pi;

ControllerGains gains_for(int n, double delta_theta) {
  ControllerGains g;
  g.coupling = ControllerGains::default_coupling(n);
  g.delta_theta = delta_theta;
  return g;
}

}  // namespace

TEST(Oscillator, AntipodalPairIsEquilibrium) {
  const ControllerGains g = gains_for(2, 0.02);
  const std::vector<double> th{0.0, kPi};
  EXPECT_NEAR(oscillator_coupling(0.0, th, g.coupling), 0.0, 1e-12);
  EXPECT_NEAR(oscillator_step(0.0, th, g, 0.1), 0.02, 1e-12);
}

TEST(Oscillator, EvenSpacingIsEquilibrium) {
  const ControllerGains g = gains_for(3, 0.02);
  const std::vector<double> th{0.0, 2 * kPi / 3, 4 * kPi / 3};
  for (double t : th) EXPECT_NEAR(oscillator_coupling(t, th, g.coupling), 0.0, 1e-12);
}

TEST(Oscillator, SingleAgentAdvancesByDeltaTheta) {
  const ControllerGains g = gains_for(1, 0.05);
  const std::vector<double> th{1.0};
  EXPECT_NEAR(oscillator_step(1.0, th, g, 0.1), 1.05, 1e-15);
}

TEST(Oscillator, OutputIsWrapped) {
  const ControllerGains g = gains_for(1, 0.5);
  const std::vector<double> th{2 * kPi - 0.1};
  const double next = oscillator_step(th[0], th, g, 0.1);
  EXPECT_GE(next, 0.0);
  EXPECT_LT(next, 2 * kPi);
  EXPECT_NEAR(next, 0.4, 1e-12);
}

TEST(Oscillator, RandomStartsSpreadOut) {
  const ControllerGains g = gains_for(3, 0.02);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  int ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> th{u(rng), u(rng), u(rng)};
    for (int k = 0; k < 600; ++k) {
      std::vector<double> next;
      for (double t : th) next.push_back(oscillator_step(t, th, g, 0.1));
      th = next;
    }
    std::sort(th.begin(), th.end());
    const double g1 = th[1] - th[0], g2 = th[2] - th[1], g3 = 2 * kPi - (th[2] - th[0]);
    ok += (std::abs(g1 - 2 * kPi / 3) < 0.05 && std::abs(g2 - 2 * kPi / 3) < 0.05 &&
           std::abs(g3 - 2 * kPi / 3) < 0.05)
              ? 1
              : 0;
  }
  EXPECT_GE(ok, 48);
}

TEST(DesiredState, OnCircle) {
  const ControllerGains g = gains_for(2, 0.0);
  const DesiredState d = desired_relative_state(0.0, g, 0.1);
  EXPECT_NEAR((d.p - Vec2(2.0, 0.0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(d.v, Vec2::Zero());
}

TEST(DesiredState, VelocityFromRotation) {
  const ControllerGains g = gains_for(2, 0.1);
  const DesiredState d = desired_relative_state(kPi / 2, g, 0.1);
  EXPECT_NEAR((d.p - Vec2(0.0, 2.0)).norm(), 0.0, 1e-15);
  const Vec2 expected(-std::sin(0.1) * 2.0 * 10.0, (std::cos(0.1) - 1.0) * 2.0 * 10.0);
  EXPECT_NEAR((d.v - expected).norm(), 0.0, 1e-12);
  EXPECT_NEAR(d.v.x(), -1.9967, 1e-4);
  EXPECT_NEAR(d.v.y(), -0.0999, 1e-4);
}

TEST(DesiredState, InterAgentDifference) {
  const ControllerGains g = gains_for(2, 0.0);
  const DesiredState a = desired_relative_state(0.0, g, 0.1), b = desired_relative_state(kPi, g, 0.1);
  EXPECT_NEAR((desired_inter_agent(a, b).p - Vec2(4.0, 0.0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(desired_inter_agent(a, a).p, Vec2::Zero());
}

TEST(Saturate, Examples) {
  EXPECT_EQ(saturate(10.0, Vec2(3.0, 4.0)), Vec2(3.0, 4.0));
  EXPECT_NEAR((saturate(1.0, Vec2(3.0, 4.0)) - Vec2(0.6, 0.8)).norm(), 0.0, 1e-15);
  EXPECT_EQ(saturate(1.0, Vec2::Zero()), Vec2::Zero());
}

TEST(Saturate, NormBoundedAndDirectionKept) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 u(g(rng), g(rng));
    const Vec2 s = saturate(2.0, u);
    EXPECT_LE(s.norm(), 2.0 + 1e-12);
    EXPECT_NEAR(u.x() * s.y() - u.y() * s.x(), 0.0, 1e-9);
    EXPECT_GE(u.dot(s), 0.0);
  }
}

TEST(Formation, PerfectTrackingGivesZeroControl) {
  const ControllerGains g = gains_for(2, 0.0);
  const DesiredState d = desired_relative_state(0.3, g, 0.1);
  FormationInputs in;
  in.desired_i0 = d;
  in.target = RelativeTrackingTerm{d.p, d.v, d};
  const DesiredState dj = desired_relative_state(0.3 + kPi, g, 0.1);
  const DesiredState dij = desired_inter_agent(d, dj);
  in.neighbors.push_back({dij.p, dij.v, dij});
  EXPECT_NEAR(formation_control(in, g, 0.1).u.norm(), 0.0, 1e-12);
}

TEST(Formation, RadiusErrorTerm) {
  ControllerGains g = gains_for(1, 0.0);
  g.k_p = 0.0;
  g.k_v = 0.0;
  g.k_rho = 0.5;
  FormationInputs in;
  in.desired_i0 = {Vec2(3.0, 0.0), Vec2::Zero()};
  in.target = RelativeTrackingTerm{Vec2(3.0, 0.0), Vec2::Zero(), in.desired_i0};
  const FormationOutput out = formation_control(in, g, 0.1);
  EXPECT_NEAR((out.u2_raw - Vec2(-1.5, 0.0)).norm(), 0.0, 1e-12);
}

TEST(Formation, MissingTargetEstimateIsControllerInputError) {
  try {
    formation_control(FormationInputs{}, gains_for(1, 0.0), 0.1);
    FAIL() << "expected controller_input";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::controller_input);
  }
}

TEST(Yaw, DesiredHeadingPointsAtTarget) {
  EXPECT_NEAR(desired_yaw(Vec2(1.0, 0.0)), kPi, 1e-15);
  EXPECT_NEAR(desired_yaw(Vec2(0.0, -2.0)), kPi / 2, 1e-15);
}

TEST(Yaw, AlignedHeadingGivesZeroCommand) {
  const Vec2 p(1.0, 1.0);
  EXPECT_NEAR(*yaw_control(desired_yaw(p), p, 0.5), 0.0, 1e-15);
}

TEST(Yaw, BoundaryErrorHasHalfPiMagnitude) {
  // psi = 0, psi_hat = pi: the wrapped error sits on the boundary.
  const auto u = yaw_control(0.0, Vec2(1.0, 0.0), 0.5);
  ASSERT_TRUE(u.has_value());
  EXPECT_NEAR(std::abs(*u), 0.5 * kPi, 1e-12);
}

TEST(Yaw, ClosedLoopConverges) {
  const Vec2 p(1.0, 0.0);
  double psi = 0.0;
  for (int k = 0; k < 50; ++k) psi = wrap_pi(psi + *yaw_control(psi, p, 0.5));
  EXPECT_LT(std::abs(wrap_pi(psi - desired_yaw(p))), 0.01);
}

TEST(Yaw, ZeroEstimateHoldsCommand) {
  EXPECT_FALSE(yaw_control(0.3, Vec2::Zero(), 0.5).has_value());
}
