#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace circnav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Mat24 = Eigen::Matrix<double, 2, 4>;

/// Diagonal floor added to a matrix whose SPD factorization failed.
inline constexpr double kConditioningFloor = 1e-12;

/// Discrete double integrator x' = A x + B u over a step of length dt,
/// with x = [p; v] in the plane.
inline Mat4 transition_matrix(double dt) {
  Mat4 a = Mat4::Identity();
  a(0, 2) = dt;
  a(1, 3) = dt;
  return a;
}

inline Eigen::Matrix<double, 4, 2> input_matrix(double dt) {
  Eigen::Matrix<double, 4, 2> b = Eigen::Matrix<double, 4, 2>::Zero();
  b(2, 0) = dt;
  b(3, 1) = dt;
  return b;
}

/// Position selector C = [I 0].
inline Mat24 position_selector() {
  Mat24 c = Mat24::Zero();
  c(0, 0) = 1.0;
  c(1, 1) = 1.0;
  return c;
}

template <typename Derived>
auto symmetrized(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  return Plain(0.5 * (m + m.transpose()));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

/// Inverse of a symmetric positive-definite matrix via Cholesky. Retries once
/// with kConditioningFloor on the diagonal; returns false if that also fails.
template <int N>
bool spd_inverse(const Eigen::Matrix<double, N, N>& m, Eigen::Matrix<double, N, N>& out) {
  using M = Eigen::Matrix<double, N, N>;
  const M sym = symmetrized(m);
  Eigen::LLT<M> llt(sym);
  if (llt.info() != Eigen::Success) {
    llt.compute(sym + kConditioningFloor * M::Identity());
    if (llt.info() != Eigen::Success) return false;
  }
  out = symmetrized(llt.solve(M::Identity()));
  return out.allFinite();
}

/// Wraps to (-pi, pi].
inline double wrap_pi(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

/// Wraps to [0, 2pi).
inline double wrap_two_pi(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a;
}

inline Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

inline Mat3 yaw_rotation(double psi) {
  Mat3 r = Mat3::Identity();
  r.topLeftCorner<2, 2>() = rotation(psi);
  return r;
}

}  // namespace circnav
