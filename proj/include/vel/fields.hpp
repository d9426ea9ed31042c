#pragma once

// Gridded background (s, r, u^i) and linearized (s~, r~, u~^i) states.  The
// zero components are always derived: u^0 by normalization, u~^0 by
// orthogonality, so the pointwise constraints hold by construction.

#include <array>

#include "vel/grid.hpp"
#include "vel/thermo.hpp"

namespace vel {

struct BackgroundState {
  GasParams gas;
  double t = 0;
  Field s, r;
  std::array<Field, 3> u;  // spatial components
};

struct LinearizedState {
  double t = 0;
  Field s, r;
  std::array<Field, 3> u;
};

inline Field u0_field(const BackgroundState& bg) {
  return (1.0 + bg.u[0].square() + bg.u[1].square() + bg.u[2].square()).sqrt();
}

inline Field lin_u0_field(const BackgroundState& bg, const std::array<Field, 3>& ut) {
  return (bg.u[0] * ut[0] + bg.u[1] * ut[1] + bg.u[2] * ut[2]) / u0_field(bg);
}

inline Field gamma_field(const BackgroundState& bg) {
  const double c = std::pow(bg.gas.gamma - 1.0, bg.gas.em()) / bg.gas.gamma;
  return c * (-bg.gas.em() * bg.s).exp();
}

inline BackgroundState zero_background(const Grid& g, const GasParams& gas, double r0 = 0.1) {
  BackgroundState bg;
  bg.gas = gas;
  bg.s = Field::Zero(g.size());
  bg.r = Field::Constant(g.size(), r0);
  for (auto& c : bg.u) c = Field::Zero(g.size());
  return bg;
}

inline LinearizedState zero_linearized(const Grid& g) {
  LinearizedState lin;
  lin.s = Field::Zero(g.size());
  lin.r = Field::Zero(g.size());
  for (auto& c : lin.u) c = Field::Zero(g.size());
  return lin;
}

// |X|^2_G = g_{mu nu} X^mu X^nu + 2 (u_mu X^mu)^2 pointwise over the grid;
// X0..X3 carry the upper-index components
inline Field g_norm_sq_field(const BackgroundState& bg, const Field& X0, const Field& X1,
                             const Field& X2, const Field& X3) {
  const Field u0 = u0_field(bg);
  const Field udotX = -u0 * X0 + bg.u[0] * X1 + bg.u[1] * X2 + bg.u[2] * X3;
  return -X0.square() + X1.square() + X2.square() + X3.square() + 2.0 * udotX.square();
}

}  // namespace vel
