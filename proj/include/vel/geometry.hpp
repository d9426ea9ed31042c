#pragma once

// Minkowski-signature pointwise tensor algebra, signature (-,+,+,+).
// Everything is templated on the scalar so the same formulas serve plain
// doubles, dual numbers, and time-jet scalars.

#include <Eigen/Dense>
#include <stdexcept>

#include "vel/dual.hpp"

namespace vel {

template <class T>
using Vec4 = Eigen::Matrix<T, 4, 1>;
template <class T>
using Vec3 = Eigen::Matrix<T, 3, 1>;
template <class T>
using Mat4 = Eigen::Matrix<T, 4, 4>;
template <class T>
using Mat3 = Eigen::Matrix<T, 3, 3>;
template <class T>
using Mat43 = Eigen::Matrix<T, 4, 3>;

// metric g = diag(-1, 1, 1, 1); identical with raised or lowered indices
constexpr double minkowski(int a, int b) { return a != b ? 0.0 : (a == 0 ? -1.0 : 1.0); }

// u^0 = sqrt(1 + |u_spatial|^2), so the constraint g_{mu nu} u^mu u^nu = -1
// holds by construction.
template <class T>
Vec4<T> complete_velocity(const Vec3<T>& u_spatial) {
  Vec4<T> u;
  u[0] = sqrt(T(1) + u_spatial[0] * u_spatial[0] + u_spatial[1] * u_spatial[1] +
              u_spatial[2] * u_spatial[2]);
  u[1] = u_spatial[0];
  u[2] = u_spatial[1];
  u[3] = u_spatial[2];
  return u;
}

template <class T>
Vec4<T> lower_index(const Vec4<T>& x) {
  Vec4<T> lo = x;
  lo[0] = -x[0];
  return lo;
}

template <class T>
T dot_minkowski(const Vec4<T>& a, const Vec4<T>& b) {
  return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

// u~^0 from the orthogonality u~_alpha u^alpha = 0
template <class T>
T lin_velocity_zero(const Vec4<T>& u, const Vec3<T>& lin_spatial) {
  return (u[1] * lin_spatial[0] + u[2] * lin_spatial[1] + u[3] * lin_spatial[2]) / u[0];
}

template <class T>
struct TensorPack {
  Mat4<T> Pi;    // Pi^{alpha beta} = g^{alpha beta} + u^alpha u^beta
  Mat4<T> G;     // G_{alpha beta} = g_{alpha beta} + 2 u_alpha u_beta
  Mat4<T> Ginv;  // G^{alpha beta} = g^{alpha beta} + 2 u^alpha u^beta
  Mat3<T> H;     // H^{ij} = delta^{ij} - u^i u^j / (u^0)^2
  Mat43<T> B;    // B^{alpha i} = g^{alpha i} - g^{alpha 0} u^i / u^0
};

struct ConstraintViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T>
TensorPack<T> tensor_pack(const Vec4<T>& u) {
  if (std::abs(value_of(dot_minkowski(u, u)) + 1.0) > 1e-10)
    throw ConstraintViolated("four-velocity normalization violated");
  TensorPack<T> P;
  const Vec4<T> ul = lower_index(u);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      P.Pi(a, b) = T(minkowski(a, b)) + u[a] * u[b];
      P.G(a, b) = T(minkowski(a, b)) + T(2) * ul[a] * ul[b];
      P.Ginv(a, b) = T(minkowski(a, b)) + T(2) * u[a] * u[b];
    }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      P.H(i, j) = T(i == j ? 1 : 0) - u[i + 1] * u[j + 1] / (u[0] * u[0]);
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 3; ++i)
      P.B(a, i) = T(minkowski(a, i + 1)) - T(minkowski(a, 0)) * u[i + 1] / u[0];
  return P;
}

// |X|^2_G = G_{alpha beta} X^alpha X^beta
template <class T>
T g_norm_sq(const Mat4<T>& G, const Vec4<T>& X) {
  T s{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) s += G(a, b) * X[a] * X[b];
  return s;
}

}  // namespace vel
