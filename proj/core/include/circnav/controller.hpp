#pragma once

#include "circnav/linalg.hpp"

#include <optional>
#include <span>
#include <vector>

namespace circnav {

struct ControllerGains {
  double rho = 2.0;                                            // orbit radius, m
  double delta_theta = 2.0 * std::numbers::pi * 0.1 / 30.0;    // rad per step
  std::vector<double> coupling{1.0, 0.2, 0.2};                 // G_1..G_N
  double k_p = 1.0;
  double k_v = 1.5;
  double k_rho = 0.5;
  double u1_max = 3.0;  // m/s^2
  double u2_max = 3.0;  // m/s^2
  double k_psi = 0.5;

  /// Coupling list G_1..G_N for N agents, default G_1 = 1, G_l = 0.2.
  static std::vector<double> default_coupling(int n);
};

/// Sum over j, l of G_l/(l N) sin(l (theta_i - theta_j)) with N = thetas.size().
double oscillator_coupling(double theta_i, std::span<const double> thetas, std::span<const double> coupling);

/// theta_i + delta_theta + dt * coupling, wrapped to [0, 2pi). thetas holds
/// every alive agent (self included); G is truncated to its first N entries.
double oscillator_step(double theta_i, std::span<const double> thetas, const ControllerGains& gains, double dt);

struct DesiredState {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
};

/// p* = rho (cos theta, sin theta), v* = (R_dtheta - I) p* / dt.
DesiredState desired_relative_state(double theta_i, const ControllerGains& gains, double dt);

/// Componentwise difference of two agents' desired states w.r.t. the target.
DesiredState desired_inter_agent(const DesiredState& i0, const DesiredState& j0);

/// s(U, u) = min(U, |u|)/|u| * u, with s(U, 0) = 0.
Vec2 saturate(double bound, const Vec2& u);

struct RelativeTrackingTerm {
  Vec2 p_hat = Vec2::Zero();
  Vec2 v_hat = Vec2::Zero();
  DesiredState desired;
};

struct FormationInputs {
  std::optional<RelativeTrackingTerm> target;   // j = 0 term, p_hat_i0 / v_hat_i0
  std::vector<RelativeTrackingTerm> neighbors;  // j in N_i
  DesiredState desired_i0;
};

struct FormationOutput {
  Vec2 u = Vec2::Zero();
  Vec2 u1_raw = Vec2::Zero();  // before saturation
  Vec2 u2_raw = Vec2::Zero();
  Vec2 feedforward = Vec2::Zero();
};

/// u = s(U1, u1) + s(U2, u2) + (R_dtheta - I) v*_i0 / dt. Throws
/// controller_input if the target estimate is missing.
FormationOutput formation_control(const FormationInputs& in, const ControllerGains& gains, double dt);

/// Heading that points the camera at the target: atan2(-p_y, -p_x).
double desired_yaw(const Vec2& p_hat_i0);

/// u_psi = -K_psi wrap(psi - psi_hat). Empty when p_hat_i0 is zero (caller
/// holds its previous command).
std::optional<double> yaw_control(double psi, const Vec2& p_hat_i0, double k_psi);

}  // namespace circnav
