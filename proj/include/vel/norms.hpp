#pragma once

// Degenerate-weight Sobolev norms and the energies built from them.  The
// weight exponents follow one bookkeeping constant sigma0 = (2-gamma)/(2(gamma-1));
// r-like quantities always carry a weight 1/2 lower than s-like and u-like ones.

#include <functional>
#include <vector>

#include "vel/fields.hpp"

namespace vel {

struct NormSpec {
  int j = 0;
  double sigma = 0;
};

inline void check_spec(const NormSpec& spec) {
  if (spec.j < 0 || !(spec.sigma > -0.5)) throw std::invalid_argument("inadmissible norm spec");
}

inline double sigma0(const GasParams& gp) { return (2.0 - gp.gamma) / (2.0 * (gp.gamma - 1.0)); }

using MultiIndex = std::array<int, 2>;

inline std::vector<MultiIndex> multi_indices(int dim, int order) {
  std::vector<MultiIndex> out;
  if (dim == 1) {
    out.push_back({order, 0});
  } else {
    for (int a = 0; a <= order; ++a) out.push_back({a, order - a});
  }
  return out;
}

inline Field deriv(const Grid& g, const Field& f, const MultiIndex& alpha) {
  Field out = g.diff(f, 0, alpha[0]);
  if (g.dim() == 2 && alpha[1] > 0) out = g.diff(out, 1, alpha[1]);
  return out;
}

// sum_{|alpha| = order} int r^{2 sigma} |d^alpha f|^2 for one scalar field
inline double hom_weighted_sq(const Grid& g, const Field& r, double sigma, int order,
                              const Field& f) {
  double s = 0;
  for (const auto& a : multi_indices(g.dim(), order)) {
    const Field d = deriv(g, f, a);
    s += integrate_weighted(g, r, 2.0 * sigma, Field(d.square()));
  }
  return s;
}

inline double weighted_sobolev_norm_sq(const Grid& g, const Field& r, const Field& f,
                                       const NormSpec& spec) {
  check_spec(spec);
  double s = 0;
  for (int o = 0; o <= spec.j; ++o) s += hom_weighted_sq(g, r, spec.sigma, o, f);
  return s;
}

inline double weighted_sobolev_norm(const Grid& g, const Field& r, const Field& f,
                                    const NormSpec& spec) {
  return std::sqrt(weighted_sobolev_norm_sq(g, r, f, spec));
}

// vector version: differentiate each supplied component, then evaluate a
// pointwise square density on the derived components (G-contraction etc.)
using SquareDensity = std::function<Field(const std::vector<Field>&)>;

inline double hom_weighted_sq_vec(const Grid& g, const Field& r, double sigma, int order,
                                  const std::vector<Field>& comps, const SquareDensity& dens) {
  double s = 0;
  for (const auto& a : multi_indices(g.dim(), order)) {
    std::vector<Field> d;
    d.reserve(comps.size());
    for (const auto& c : comps) d.push_back(deriv(g, c, a));
    s += integrate_weighted(g, r, 2.0 * sigma, dens(d));
  }
  return s;
}

inline double weighted_sobolev_norm_sq_vec(const Grid& g, const Field& r,
                                           const std::vector<Field>& comps,
                                           const SquareDensity& dens, const NormSpec& spec) {
  check_spec(spec);
  double s = 0;
  for (int o = 0; o <= spec.j; ++o) s += hom_weighted_sq_vec(g, r, spec.sigma, o, comps, dens);
  return s;
}

inline std::vector<Field> four_components(const BackgroundState& bg,
                                          const std::array<Field, 3>& ut) {
  return {lin_u0_field(bg, ut), ut[0], ut[1], ut[2]};
}

inline SquareDensity g_density(const BackgroundState& bg) {
  return [&bg](const std::vector<Field>& d) {
    return g_norm_sq_field(bg, d[0], d[1], d[2], d[3]);
  };
}

// squared state norm: sum over |alpha| <= 2k and the admissible extra weight
// range a, with the r~ weight exactly 1/2 below the s~/u~ weight
inline double h2k_norm_sq(const Grid& g, const BackgroundState& bg, const LinearizedState& lin,
                          int k) {
  const double s0 = sigma0(bg.gas);
  const std::vector<Field> uc = four_components(bg, lin.u);
  const SquareDensity dens = g_density(bg);
  double total = 0;
  for (int o = 0; o <= 2 * k; ++o)
    for (int a = std::max(0, o - k); a <= k; ++a) {
      total += hom_weighted_sq(g, bg.r, s0 + 0.5 + a, o, lin.s);
      total += hom_weighted_sq(g, bg.r, s0 + a, o, lin.r);
      total += hom_weighted_sq_vec(g, bg.r, s0 + 0.5 + a, o, uc, dens);
    }
  return total;
}

inline double h2k_norm(const Grid& g, const BackgroundState& bg, const LinearizedState& lin,
                       int k) {
  return std::sqrt(h2k_norm_sq(g, bg, lin, k));
}

// compatible pair norm: int r^{2 sigma0} ( r~^2/(gamma-1) + (Gamma+r) r |u~|_G^2 )
inline double th_norm_sq(const Grid& g, const BackgroundState& bg, const Field& rt,
                         const std::vector<Field>& ut4) {
  const Field Gam = gamma_field(bg);
  const Field usq = g_norm_sq_field(bg, ut4[0], ut4[1], ut4[2], ut4[3]);
  const Field dens = rt.square() / (bg.gas.gamma - 1.0) + (Gam + bg.r) * bg.r * usq;
  return integrate_weighted(g, bg.r, 2.0 * sigma0(bg.gas), dens);
}

// squared base energy
inline double e0_energy(const Grid& g, const BackgroundState& bg, const LinearizedState& lin) {
  const Field Gam = gamma_field(bg);
  const std::vector<Field> uc = four_components(bg, lin.u);
  const Field usq = g_norm_sq_field(bg, uc[0], uc[1], uc[2], uc[3]);
  const Field dens = lin.r.square() / (bg.gas.gamma - 1.0) + (Gam + bg.r) * bg.r * usq +
                     bg.r * lin.s.square();
  return 0.5 * integrate_weighted(g, bg.r, 2.0 * sigma0(bg.gas), dens);
}

// wave energy from supplied convective powers: pairs (D_t^{2j} r~, D_t^{2j} u~)
struct ConvectivePair {
  Field rt;
  std::vector<Field> ut4;
};

struct MissingConvectivePowers : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double wave_energy_sq(const Grid& g, const BackgroundState& bg,
                             const std::vector<ConvectivePair>& pairs, int k) {
  if (int(pairs.size()) != k + 1)
    throw MissingConvectivePowers("wave energy needs D_t^{2j} pairs for j = 0..k");
  double s = 0;
  for (const auto& p : pairs) s += th_norm_sq(g, bg, p.rt, p.ut4);
  return s;
}

// entropy half of the transport energy; the vorticity half lives with the
// vorticity utilities
inline double entropy_transport_sq(const Grid& g, const BackgroundState& bg, const Field& st,
                                   int k) {
  const double sig = k + 1.0 / (2.0 * (bg.gas.gamma - 1.0));
  return weighted_sobolev_norm_sq(g, bg.r, st, NormSpec{2 * k, sig});
}

struct EnergyReport {
  double e0 = 0, wave = 0, transport = 0, total = 0;
};

}  // namespace vel
