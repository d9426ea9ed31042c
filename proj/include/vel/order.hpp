#pragma once

// Symbolic book-keeping for free-boundary terms r^m \partial^l (s~, r~, u~).
// Orders are exact half-integers stored as doubled ints; O(1) background
// coefficients (s, u, \partial s, \partial r, \partial u, projections) are
// deliberately erased, so a term sum is a multiset of schematic shapes.

#include <compare>
#include <optional>
#include <stdexcept>
#include <vector>

namespace vel {

enum class VarKind { EntropyLin, SoundLin, VelocityLin };

struct Order {
  int doubled = 0;

  static constexpr Order halves(int n) { return Order{n}; }
  static constexpr Order whole(int n) { return Order{2 * n}; }
  constexpr double value() const { return doubled / 2.0; }

  friend constexpr auto operator<=>(const Order&, const Order&) = default;
  friend constexpr Order operator+(Order a, Order b) { return Order{a.doubled + b.doubled}; }
  friend constexpr Order operator-(Order a, Order b) { return Order{a.doubled - b.doubled}; }
};

struct Term {
  int m = 0;  // power of r
  int l = 0;  // derivative count
  VarKind var = VarKind::SoundLin;

  friend constexpr auto operator<=>(const Term&, const Term&) = default;
};

// O = m - l + k for r~ terms, m - l + k - 1/2 for s~ and u~ terms.
constexpr Order order_of(const Term& t, int k) {
  int doubled = 2 * (t.m - t.l + k);
  if (t.var != VarKind::SoundLin) doubled -= 1;
  return Order{doubled};
}

enum class Criticality { Subcritical, Critical, Supercritical };

constexpr Criticality classify(const Term& t, int k) {
  const int d = order_of(t, k).doubled;
  if (d > 0) return Criticality::Subcritical;
  if (d == 0) return Criticality::Critical;
  return Criticality::Supercritical;
}

// Order of a product is the sum of the orders; the product is estimable
// against the squared H^{2k} norm only when the sum is nonnegative.
inline std::optional<Order> product_order(const Term& a, const Term& b, int k) {
  const Order sum = order_of(a, k) + order_of(b, k);
  if (sum.doubled < 0) return std::nullopt;
  return sum;
}

struct TermSum {
  std::vector<Term> terms;  // multiset; duplicates keep rewrite provenance

  Order min_order(int k) const {
    if (terms.empty()) throw std::logic_error("min_order of empty term sum");
    Order best = order_of(terms.front(), k);
    for (const Term& t : terms) best = std::min(best, order_of(t, k));
    return best;
  }
  void add(int m, int l, VarKind v) { terms.push_back(Term{m, l, v}); }
};

enum class OpKind { MulR, Partial, Dt };

// Rewrite rules for one application of r*, \partial, or D_t.  The D_t branch
// follows the operation-order lemma's proof case by case; the chain-rule
// branch m r^m T appears only when m >= 1, and the D_t result keeps one
// member per provenance (the \partial r branch of \partial^l(r \partial u~)
// duplicates the shape r^m \partial^l u~ on purpose).
inline TermSum apply_op(OpKind op, const Term& t, int /*k*/) {
  TermSum out;
  switch (op) {
    case OpKind::MulR:
      out.add(t.m + 1, t.l, t.var);
      return out;
    case OpKind::Partial:
      out.add(t.m, t.l + 1, t.var);
      if (t.m >= 1) out.add(t.m - 1, t.l, t.var);
      return out;
    case OpKind::Dt:
      break;
  }
  const int m = t.m, l = t.l;
  switch (t.var) {
    case VarKind::SoundLin:
      if (l == 0) {
        out.add(m + 1, 1, VarKind::VelocityLin);
        out.add(m, 0, VarKind::VelocityLin);
      } else {
        out.add(m, l, VarKind::VelocityLin);      // all derivatives on \partial u~
        out.add(m, l, VarKind::VelocityLin);      // one derivative on r
        out.add(m + 1, l + 1, VarKind::VelocityLin);
        for (int i = 0; i < l; ++i) out.add(m, i + 1, VarKind::SoundLin);
      }
      if (m >= 1) out.add(m, l, VarKind::SoundLin);
      return out;
    case VarKind::VelocityLin:
      if (l == 0) {
        out.add(m, 1, VarKind::SoundLin);
        out.add(m, 0, VarKind::VelocityLin);
        out.add(m, 0, VarKind::EntropyLin);
      } else {
        out.add(m, l + 1, VarKind::SoundLin);
        out.add(m, l, VarKind::VelocityLin);
        out.add(m, l, VarKind::EntropyLin);
        for (int i = 0; i < l; ++i) out.add(m, i + 1, VarKind::VelocityLin);
      }
      if (m >= 1) out.add(m, l, VarKind::VelocityLin);
      return out;
    case VarKind::EntropyLin:
      if (l == 0) {
        out.add(m, 0, VarKind::VelocityLin);
      } else {
        out.add(m, l, VarKind::VelocityLin);
        for (int i = 0; i < l; ++i) out.add(m, i + 1, VarKind::EntropyLin);
      }
      if (m >= 1) out.add(m, l, VarKind::EntropyLin);
      return out;
  }
  throw std::logic_error("unreachable");
}

struct LevelShiftBelowCurrent : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raising the level from k to K >= k leaves the term set unchanged; the
// order re-evaluated at K equals the order at k plus (K - k).
inline TermSum level_shift(const Term& t, int k, int K) {
  if (K < k) throw LevelShiftBelowCurrent("level shift target below current level");
  return TermSum{{t}};
}

struct NonPositivePower : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Schematic expansion of D_t^i applied to a bare linearized variable.
inline TermSum dt_power_expand(VarKind var, int i) {
  if (i < 1) throw NonPositivePower("dt_power_expand needs i >= 1");
  TermSum out;
  if (var == VarKind::EntropyLin) {
    if (i == 1) {
      out.add(0, 0, VarKind::VelocityLin);
      return out;
    }
    return dt_power_expand(VarKind::VelocityLin, i - 1);
  }
  if (var == VarKind::SoundLin) {
    if (i % 2 == 0) {
      for (int l = 0; l <= i / 2; ++l) out.add(l, l + i / 2, VarKind::SoundLin);
    } else {
      for (int l = 0; l <= (i + 1) / 2; ++l) out.add(l, l + (i - 1) / 2, VarKind::VelocityLin);
    }
    return out;
  }
  // VelocityLin
  if (i % 2 == 0) {
    for (int l = 0; l <= i / 2; ++l) out.add(l, l + i / 2, VarKind::VelocityLin);
    for (int j = 0; j <= i / 2 - 1; ++j) out.add(j, j + i / 2, VarKind::SoundLin);
  } else {
    for (int l = 0; l <= (i - 1) / 2; ++l) {
      out.add(l, l + (i + 1) / 2, VarKind::SoundLin);
      out.add(l, l + (i - 1) / 2, VarKind::VelocityLin);
      out.add(l, l + (i - 1) / 2, VarKind::EntropyLin);
    }
  }
  return out;
}

enum class CommutatorKind { PartialDtN, DtPartialN };

// One schematic member C * \partial^{partial_power} (D_t^{dt_power} phi).
// coeff_derivs counts spatial derivatives on the background velocity in the
// coefficient class (-1 when the expansion is generic and unspecified);
// multiplicity/sign are exact only for the displayed base cases N <= 2.
struct SchematicCommutatorTerm {
  int dt_power = 0;
  int partial_power = 1;
  int coeff_derivs = -1;
  int multiplicity = 1;
  int sign = 1;
};

inline std::vector<SchematicCommutatorTerm> commutator_expand(CommutatorKind kind, int N) {
  if (N < 1) throw NonPositivePower("commutator_expand needs N >= 1");
  std::vector<SchematicCommutatorTerm> out;
  if (kind == CommutatorKind::PartialDtN) {
    // [\partial, D_t^N] phi ~ sum_{i<N} C_i \partial(D_t^i phi); base case
    // [\partial, D_t] phi = (\partial u^nu) \partial_nu phi.
    for (int i = 0; i < N; ++i)
      out.push_back({i, 1, N == 1 ? 1 : -1, 1, N == 1 ? 1 : 0});
    return out;
  }
  // [D_t, \partial^N] phi ~ sum_{i<N} B_i \partial(\partial^i phi); the
  // displayed base cases are [D_t, \partial] phi = -(\partial u^nu)
  // \partial_nu phi and [D_t, \partial^2] phi = -2 (\partial u^nu)
  // \partial_nu (\partial phi) - (\partial^2 u^nu) \partial_nu phi.
  if (N == 1) {
    out.push_back({0, 1, 1, 1, -1});
  } else if (N == 2) {
    out.push_back({0, 2, 1, 2, -1});
    out.push_back({0, 1, 2, 1, -1});
  } else {
    for (int i = 0; i < N; ++i) out.push_back({0, i + 1, -1, 1, 0});
  }
  return out;
}

// ----- schematic certifications used by the elliptic module -----

// D_t^2 r~ ~ L~_1 r~ + remainder.  Principal part of L~_1 r~: r \partial^2 r~
// and \partial r~; remainder members listed with their shapes.
inline TermSum l1_good_principal_schematic() {
  TermSum out;
  out.add(1, 2, VarKind::SoundLin);
  out.add(0, 1, VarKind::SoundLin);
  return out;
}
inline TermSum dt2_rtilde_remainder_schematic() {
  TermSum out;
  out.add(1, 1, VarKind::VelocityLin);
  out.add(1, 1, VarKind::EntropyLin);
  out.add(0, 0, VarKind::VelocityLin);
  out.add(1, 1, VarKind::SoundLin);
  return out;
}

// D_t^2 u~ ~ L~_2 u~ + remainder; principal part r \partial^2 u~ + \partial u~,
// remainder of shape \partial r~ (critical, order 0 at level 1).
inline TermSum l2_good_principal_schematic() {
  TermSum out;
  out.add(1, 2, VarKind::VelocityLin);
  out.add(0, 1, VarKind::VelocityLin);
  return out;
}
inline TermSum dt2_utilde_remainder_schematic() {
  TermSum out;
  out.add(0, 1, VarKind::SoundLin);
  return out;
}

// Explicit members of the commutator [L^{m,2m}, L~_1] applied to r~, with
// L^{a,b} = r^a \partial^b: \partial r L^{m,2m-1} \partial^2 r~,
// 2m \partial r L^{m,2m} \partial r~ and \partial r \partial r L^{m-1,2m} r~,
// plus a remainder class of order >= 1/2.
inline TermSum commutator_Lm_L1_explicit(int m) {
  if (m < 1) throw NonPositivePower("commutator needs m >= 1");
  TermSum out;
  out.add(m, 2 * m + 1, VarKind::SoundLin);
  out.add(m, 2 * m + 1, VarKind::SoundLin);
  if (m >= 1) out.add(m - 1, 2 * m, VarKind::SoundLin);
  return out;
}

}  // namespace vel
