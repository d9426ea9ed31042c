#pragma once

// Forward-mode first derivative: Dual carries a value and one directional
// derivative through arbitrary scalar algebra.  Instantiating the closed-form
// state functions with Dual scalars yields their exact linearizations.

#include <cmath>

namespace vel {

template <class T>
struct Dual {
  T v{};  // value
  T d{};  // directional derivative

  Dual() = default;
  Dual(T value) : v(value), d{} {}
  Dual(T value, T deriv) : v(value), d(deriv) {}

  friend Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
  friend Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
  friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
  }
  Dual& operator+=(const Dual& o) { return *this = *this + o; }
  Dual& operator-=(const Dual& o) { return *this = *this - o; }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }
};

using std::exp;
using std::sqrt;

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  const T s = sqrt(a.v);
  return {s, a.d / (T(2) * s)};
}

template <class T>
Dual<T> exp(const Dual<T>& a) {
  const T e = exp(a.v);
  return {e, a.d * e};
}

// value extraction that also works on plain scalars
inline double value_of(double x) { return x; }
template <class T>
auto value_of(const Dual<T>& x) { return value_of(x.v); }

}  // namespace vel
