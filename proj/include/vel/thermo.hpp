#pragma once

// Ideal-gas variable changes between (n, eps, p) and (s, r), the entropy
// weight Gamma(s), enthalpy, and the acoustic speed.  r = p^{(gamma-1)/gamma}
// vanishes simply at the vacuum boundary and plays the role of distance.

#include <cmath>
#include <stdexcept>

#include "vel/dual.hpp"

namespace vel {

struct GasParams {
  double gamma = 2.0;  // adiabatic constant, > 1
  double s0 = 0.0;     // entropy offset

  double em() const { return (gamma - 1.0) / gamma; }  // recurring exponent
};

// Gamma(s) = (gamma-1)^{(gamma-1)/gamma} / (gamma e^{((gamma-1)/gamma) s});
// strictly positive, strictly decreasing, Gamma' = -((gamma-1)/gamma) Gamma.
template <class T>
T gamma_of_entropy(const T& s, const GasParams& gp) {
  const double c = std::pow(gp.gamma - 1.0, gp.em()) / gp.gamma;
  return T(c) * exp(T(-gp.em()) * s);
}

template <class T>
T gamma_prime(const T& s, const GasParams& gp) {
  return T(-gp.em()) * gamma_of_entropy(s, gp);
}

// c^2 = (gamma-1) r / (Gamma(s) + r): zero exactly at the vacuum, increasing
// in r, bounded by gamma-1.
template <class T>
T sound_speed_sq(const T& r, const T& s, const GasParams& gp) {
  return T(gp.gamma - 1.0) * r / (gamma_of_entropy(s, gp) + r);
}

struct ThermoPoint {
  double s = 0, r = 0, p = 0, eps = 0, n = 0, h = 1, Gamma = 0;
};

struct NegativeInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class PrTag { Pressure, SoundWeight };

inline ThermoPoint point_from_pr(PrTag tag, double value, double s, const GasParams& gp) {
  if (value < 0) throw NegativeInput("pressure-like input must be nonnegative");
  ThermoPoint t;
  t.s = s;
  t.Gamma = gamma_of_entropy(s, gp);
  if (tag == PrTag::Pressure) {
    t.p = value;
    t.r = std::pow(value, gp.em());
  } else {
    t.r = value;
    t.p = std::pow(value, 1.0 / gp.em());
  }
  t.eps = t.r / (gp.gamma * t.Gamma);
  t.h = (t.Gamma + t.r) / t.Gamma;  // equals eps * gamma + 1
  t.n = (gp.gamma * t.Gamma / (gp.gamma - 1.0)) * std::pow(t.r, 1.0 / (gp.gamma - 1.0));
  return t;
}

// inverse entropy map s = (1/(gamma-1)) log(eps / n^{gamma-1}) + s0; with the
// closed forms above, eps/n^{gamma-1} = e^{(gamma-1) s} exactly
inline double entropy_from(double eps, double n, const GasParams& gp) {
  return (1.0 / (gp.gamma - 1.0)) * (std::log(eps) - (gp.gamma - 1.0) * std::log(n)) + gp.s0;
}

// enthalpy h = (Gamma + r)/Gamma, templated for dual/jet scalars
template <class T>
T enthalpy(const T& r, const T& s, const GasParams& gp) {
  const T G = gamma_of_entropy(s, gp);
  return (G + r) / G;
}

}  // namespace vel
