#include "circnav/controller.hpp"

#include "circnav/error.hpp"

#include <algorithm>
#include <cmath>

namespace circnav {

std::vector<double> ControllerGains::default_coupling(int n) {
  std::vector<double> g(static_cast<std::size_t>(std::max(n, 1)), 0.2);
  g.front() = 1.0;
  return g;
}

double oscillator_coupling(double theta_i, std::span<const double> thetas, std::span<const double> coupling) {
  const std::size_t n = thetas.size();
  if (n == 0) return 0.0;
  const std::size_t harmonics = std::min(n, coupling.size());
  const double nn = static_cast<double>(n);
  double sum = 0.0;
  for (const double theta_j : thetas) {
    const double diff = theta_i - theta_j;
    for (std::size_t l = 1; l <= harmonics; ++l) {
      const double ld = static_cast<double>(l);
      sum += coupling[l - 1] / (ld * nn) * std::sin(ld * diff);
    }
  }
  return sum;
}

double oscillator_step(double theta_i, std::span<const double> thetas, const ControllerGains& gains, double dt) {
  return wrap_two_pi(theta_i + gains.delta_theta + dt * oscillator_coupling(theta_i, thetas, gains.coupling));
}

DesiredState desired_relative_state(double theta_i, const ControllerGains& gains, double dt) {
  DesiredState d;
  d.p = gains.rho * Vec2(std::cos(theta_i), std::sin(theta_i));
  d.v = (rotation(gains.delta_theta) - Mat2::Identity()) * d.p / dt;
  return d;
}

DesiredState desired_inter_agent(const DesiredState& i0, const DesiredState& j0) {
  return DesiredState{i0.p - j0.p, i0.v - j0.v};
}

Vec2 saturate(double bound, const Vec2& u) {
  const double n = u.norm();
  if (n == 0.0) return Vec2::Zero();
  if (n <= bound) return u;
  return (bound / n) * u;
}

FormationOutput formation_control(const FormationInputs& in, const ControllerGains& gains, double dt) {
  if (!in.target) {
    throw Error(ErrorKind::controller_input, "formation_control: no target estimate");
  }
  FormationOutput out;
  Vec2 pos_err = in.target->p_hat - in.target->desired.p;
  Vec2 vel_err = in.target->v_hat - in.target->desired.v;
  for (const auto& nb : in.neighbors) {
    pos_err += nb.p_hat - nb.desired.p;
    vel_err += nb.v_hat - nb.desired.v;
  }
  out.u1_raw = -gains.k_p * pos_err - gains.k_v * vel_err;
  const Vec2& p_hat = in.target->p_hat;
  out.u2_raw = -gains.k_rho * (p_hat.norm() - gains.rho) * p_hat;
  out.feedforward = (rotation(gains.delta_theta) - Mat2::Identity()) * in.desired_i0.v / dt;
  out.u = saturate(gains.u1_max, out.u1_raw) + saturate(gains.u2_max, out.u2_raw) + out.feedforward;
  return out;
}

double desired_yaw(const Vec2& p_hat_i0) { return wrap_pi(std::atan2(-p_hat_i0.y(), -p_hat_i0.x())); }

std::optional<double> yaw_control(double psi, const Vec2& p_hat_i0, double k_psi) {
  if (p_hat_i0.x() == 0.0 && p_hat_i0.y() == 0.0) return std::nullopt;
  return -k_psi * wrap_pi(psi - desired_yaw(p_hat_i0));
}

}  // namespace circnav
