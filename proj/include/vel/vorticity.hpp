#pragma once

// Enthalpy current v = h u, its exterior derivative (the relativistic
// vorticity), and the linearized split omega~ = omega^ + omega-.  Residual
// routines take their time slots explicitly: callers pass either the
// elimination closed forms (single-slice identity checks) or time differences
// of an evolved series (solution verification and negative controls).

#include "vel/dynamics.hpp"

namespace vel {

// antisymmetric 4x4 field, six independent components
inline constexpr int form_pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

struct TwoForm {
  std::array<Field, 6> c;

  static int slot(int a, int b) {
    for (int k = 0; k < 6; ++k)
      if (form_pairs[k][0] == std::min(a, b) && form_pairs[k][1] == std::max(a, b)) return k;
    return -1;
  }
  // value with sign; a == b gives zero
  Field at(int a, int b) const {
    if (a == b) return Field::Zero(c[0].size());
    const int k = slot(a, b);
    return a < b ? c[k] : Field(-c[k]);
  }
};

inline TwoForm zero_form(const Grid& g) {
  TwoForm f;
  for (auto& x : f.c) x = Field::Zero(g.size());
  return f;
}

// ---------------------------------------------------------------------------
// enthalpy h = (Gamma + r)/Gamma and its exact linearization

inline Field enthalpy_field(const BackgroundState& bg) {
  return 1.0 + bg.r / gamma_field(bg);
}

inline Field enthalpy_dt(const BackgroundState& bg, const TimeDerivs& d) {
  const Field Gam = gamma_field(bg);
  // Gamma' = -em Gamma, so dt Gamma = -em Gamma dt s
  return d.r / Gam + bg.gas.em() * bg.r * d.s / Gam;
}

inline Field enthalpy_lin(const BackgroundState& bg, const LinearizedState& lin) {
  const Field Gam = gamma_field(bg);
  return lin.r / Gam + bg.gas.em() * bg.r * lin.s / Gam;
}

inline Field enthalpy_lin_dt(const BackgroundState& bg, const LinearizedState& lin,
                             const TimeDerivs& d, const TimeDerivs& dl) {
  const Field Gam = gamma_field(bg);
  const double em = bg.gas.em();
  // dt of (r~ + em r s~)/Gamma with dt Gamma = -em Gamma dt s
  const Field num = lin.r + em * bg.r * lin.s;
  const Field dtnum = dl.r + em * (d.r * lin.s + bg.r * dl.s);
  return dtnum / Gam + em * d.s * num / Gam;
}

// ---------------------------------------------------------------------------
// potentials and exterior derivative

struct Potential {
  std::array<Field, 4> v, dtv;  // lower-index components and their dt
};

inline TwoForm d_potential(const Grid& g, const Potential& p) {
  TwoForm w;
  for (int k = 0; k < 6; ++k) {
    const int a = form_pairs[k][0], b = form_pairs[k][1];
    if (a == 0) {
      w.c[k] = p.dtv[b];
      if (b - 1 < g.dim()) w.c[k] -= g.diff(p.v[0], b - 1, 1);
      else w.c[k] -= Field::Zero(g.size());
    } else {
      Field da = a - 1 < g.dim() ? g.diff(p.v[b], a - 1, 1) : Field(Field::Zero(g.size()));
      Field db = b - 1 < g.dim() ? g.diff(p.v[a], b - 1, 1) : Field(Field::Zero(g.size()));
      w.c[k] = da - db;
    }
  }
  return w;
}

inline Potential enthalpy_current(const BackgroundState& bg, const TimeDerivs& d) {
  const Field h = enthalpy_field(bg);
  const Field ht = enthalpy_dt(bg, d);
  const Field u0 = u0_field(bg);
  Potential p;
  p.v[0] = -h * u0;
  p.dtv[0] = -(ht * u0 + h * d.u0);
  for (int j = 0; j < 3; ++j) {
    p.v[j + 1] = h * bg.u[j];
    p.dtv[j + 1] = ht * bg.u[j] + h * d.u[j];
  }
  return p;
}

inline TwoForm vorticity(const Grid& g, const BackgroundState& bg, const TimeDerivs& d) {
  return d_potential(g, enthalpy_current(bg, d));
}

struct VorticityPack {
  TwoForm omega, tilde, hat, bar;
};

inline VorticityPack linearized_vorticity(const Grid& g, const BackgroundState& bg,
                                          const LinearizedState& lin, const TimeDerivs& d,
                                          const TimeDerivs& dl) {
  const Field h = enthalpy_field(bg);
  const Field ht = enthalpy_dt(bg, d);
  const Field hl = enthalpy_lin(bg, lin);
  const Field hlt = enthalpy_lin_dt(bg, lin, d, dl);
  const Field u0 = u0_field(bg);
  const Field ut0 = lin_u0_field(bg, lin.u);

  Potential hat_p, bar_p, tilde_p;
  hat_p.v[0] = -h * ut0;
  hat_p.dtv[0] = -(ht * ut0 + h * dl.u0);
  bar_p.v[0] = -hl * u0;
  bar_p.dtv[0] = -(hlt * u0 + hl * d.u0);
  for (int j = 0; j < 3; ++j) {
    hat_p.v[j + 1] = h * lin.u[j];
    hat_p.dtv[j + 1] = ht * lin.u[j] + h * dl.u[j];
    bar_p.v[j + 1] = hl * bg.u[j];
    bar_p.dtv[j + 1] = hlt * bg.u[j] + hl * d.u[j];
  }
  for (int a = 0; a < 4; ++a) {
    tilde_p.v[a] = hat_p.v[a] + bar_p.v[a];
    tilde_p.dtv[a] = hat_p.dtv[a] + bar_p.dtv[a];
  }
  VorticityPack out;
  out.omega = vorticity(g, bg, d);
  out.hat = d_potential(g, hat_p);
  out.bar = d_potential(g, bar_p);
  out.tilde = d_potential(g, tilde_p);
  return out;
}

// ---------------------------------------------------------------------------
// residuals

// helper: full 4x4 derivative tables of the background
struct BgDerivTable {
  std::array<std::array<Field, 4>, 4> du;  // du[alpha][mu] = d_mu u^alpha
  std::array<Field, 4> dr, ds;
};

inline BgDerivTable bg_deriv_table(const Grid& g, const BackgroundState& bg,
                                   const TimeDerivs& d) {
  BgDerivTable t;
  const Field u0 = u0_field(bg);
  t.dr[0] = d.r;
  t.ds[0] = d.s;
  t.du[0][0] = d.u0;
  for (int j = 0; j < 3; ++j) t.du[j + 1][0] = d.u[j];
  for (int i = 0; i < 3; ++i) {
    if (i < g.dim()) {
      t.dr[i + 1] = g.diff(bg.r, i, 1);
      t.ds[i + 1] = g.diff(bg.s, i, 1);
      Field diu0 = Field::Zero(g.size());
      for (int j = 0; j < 3; ++j) {
        t.du[j + 1][i + 1] = g.diff(bg.u[j], i, 1);
        diu0 += bg.u[j] * t.du[j + 1][i + 1];
      }
      t.du[0][i + 1] = diu0 / u0;
    } else {
      t.dr[i + 1] = Field::Zero(g.size());
      t.ds[i + 1] = Field::Zero(g.size());
      for (int a = 0; a < 4; ++a) t.du[a][i + 1] = Field::Zero(g.size());
    }
  }
  return t;
}

// u^alpha omega_{alpha beta} = ((gamma-1) r / (gamma Gamma)) d_beta s
inline std::array<Field, 4> vorticity_eq1_residual(const Grid& g, const BackgroundState& bg,
                                                   const TimeDerivs& d, const TwoForm& w) {
  const Field u0 = u0_field(bg);
  const Field coef = (bg.gas.gamma - 1.0) * bg.r / (bg.gas.gamma * gamma_field(bg));
  const BgDerivTable t = bg_deriv_table(g, bg, d);
  std::array<Field, 4> res;
  for (int b = 0; b < 4; ++b) {
    Field r = u0 * w.at(0, b);
    for (int j = 0; j < 3; ++j) r += bg.u[j] * w.at(j + 1, b);
    res[b] = r - coef * t.ds[b];
  }
  return res;
}

// transport form of the vorticity evolution; dtw supplies d_t omega
inline TwoForm vorticity_eq2_residual(const Grid& g, const BackgroundState& bg,
                                      const TimeDerivs& d, const TwoForm& w,
                                      const TwoForm& dtw) {
  const Field u0 = u0_field(bg);
  const Field coef = (bg.gas.gamma - 1.0) / (bg.gas.gamma * gamma_field(bg));
  const BgDerivTable t = bg_deriv_table(g, bg, d);
  TwoForm res;
  for (int k = 0; k < 6; ++k) {
    const int a = form_pairs[k][0], b = form_pairs[k][1];
    Field r = u0 * dtw.c[k];
    for (int i = 0; i < g.dim(); ++i) r += bg.u[i] * g.diff(w.c[k], i, 1);
    for (int mu = 0; mu < 4; ++mu) {
      r += t.du[mu][a] * w.at(mu, b);
      r += t.du[mu][b] * w.at(a, mu);
    }
    r -= coef * (t.dr[a] * t.ds[b] - t.dr[b] * t.ds[a]);
    res.c[k] = r;
  }
  return res;
}

// linearized evolution residual: the exact directional derivative of the
// nonlinear transport form, with every tilde slot supplied
inline TwoForm linearized_vorticity_evolution_residual(
    const Grid& g, const BackgroundState& bg, const LinearizedState& lin, const TimeDerivs& d,
    const TimeDerivs& dl, const TwoForm& w, const TwoForm& dtw, const TwoForm& wt,
    const TwoForm& dtwt) {
  const double gam = bg.gas.gamma;
  const Field Gam = gamma_field(bg);
  const Field u0 = u0_field(bg);
  const Field ut0 = lin_u0_field(bg, lin.u);
  const Field coef = (gam - 1.0) / (gam * Gam);
  const BgDerivTable t = bg_deriv_table(g, bg, d);

  // linearized derivative table
  std::array<std::array<Field, 4>, 4> dut;
  std::array<Field, 4> drt, dst;
  drt[0] = dl.r;
  dst[0] = dl.s;
  dut[0][0] = dl.u0;
  for (int j = 0; j < 3; ++j) dut[j + 1][0] = dl.u[j];
  for (int i = 0; i < 3; ++i) {
    if (i < g.dim()) {
      drt[i + 1] = g.diff(lin.r, i, 1);
      dst[i + 1] = g.diff(lin.s, i, 1);
      // d_i u~^0 = d_i (u_j u~^j / u^0)
      Field acc = Field::Zero(g.size());
      for (int j = 0; j < 3; ++j) {
        dut[j + 1][i + 1] = g.diff(lin.u[j], i, 1);
        acc += t.du[j + 1][i + 1] * lin.u[j] + bg.u[j] * dut[j + 1][i + 1];
      }
      dut[0][i + 1] = acc / u0 - ut0 * t.du[0][i + 1] / u0;
    } else {
      drt[i + 1] = Field::Zero(g.size());
      dst[i + 1] = Field::Zero(g.size());
      for (int a = 0; a < 4; ++a) dut[a][i + 1] = Field::Zero(g.size());
    }
  }

  TwoForm res;
  for (int k = 0; k < 6; ++k) {
    const int a = form_pairs[k][0], b = form_pairs[k][1];
    Field r = u0 * dtwt.c[k] + ut0 * dtw.c[k];
    for (int i = 0; i < g.dim(); ++i)
      r += bg.u[i] * g.diff(wt.c[k], i, 1) + lin.u[i] * g.diff(w.c[k], i, 1);
    for (int mu = 0; mu < 4; ++mu) {
      r += t.du[mu][a] * wt.at(mu, b) + dut[mu][a] * w.at(mu, b);
      r += t.du[mu][b] * wt.at(a, mu) + dut[mu][b] * w.at(a, mu);
    }
    // variation of coef: d/deps (gamma-1)/(gamma Gamma) = coef * em * s~
    const Field F = t.dr[a] * t.ds[b] - t.dr[b] * t.ds[a];
    const Field Ft = drt[a] * t.ds[b] + t.dr[a] * dst[b] - drt[b] * t.ds[a] - t.dr[b] * dst[a];
    r -= coef * bg.gas.em() * lin.s * F + coef * Ft;
    res.c[k] = r;
  }
  return res;
}

// ---------------------------------------------------------------------------
// spatial curl extraction and 2-form norms

inline std::array<Field, 3> spatial_curl_vector(const TwoForm& w) {
  return {w.at(2, 3), w.at(3, 1), w.at(1, 2)};
}

// the curl extraction bound |curl w|^2_delta <= C(u) |w|^2_G uses the
// delta/G equivalence; C(u) = lambda_max(G)^2 with lambda_max = (|u| + u^0)^2
inline Field curl_domination_constant(const BackgroundState& bg) {
  const Field w = (bg.u[0].square() + bg.u[1].square() + bg.u[2].square()).sqrt();
  return (w + u0_field(bg)).pow(4);
}

// |w|^2_G = G^{a c} G^{b d} w_{ab} w_{cd} pointwise, computed from components
inline Field two_form_g_sq(const BackgroundState& bg, const std::array<Field, 6>& comps) {
  const Field u0 = u0_field(bg);
  const std::array<const Field*, 4> uu = {&u0, &bg.u[0], &bg.u[1], &bg.u[2]};
  auto Ginv = [&](int a, int b) {
    return Field(minkowski(a, b) + 2.0 * (*uu[a]) * (*uu[b]));
  };
  auto at = [&](int a, int b) -> Field {
    if (a == b) return Field::Zero(comps[0].size());
    const int k = TwoForm::slot(a, b);
    return a < b ? comps[k] : Field(-comps[k]);
  };
  Field s = Field::Zero(comps[0].size());
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c2 = 0; c2 < 4; ++c2)
        for (int d2 = 0; d2 < 4; ++d2) s += Ginv(a, c2) * Ginv(b, d2) * at(a, b) * at(c2, d2);
  return s;
}

inline SquareDensity g2_density(const BackgroundState& bg) {
  return [&bg](const std::vector<Field>& d) {
    std::array<Field, 6> c;
    for (int k = 0; k < 6; ++k) c[k] = d[k];
    return two_form_g_sq(bg, c);
  };
}

inline double two_form_norm_sq(const Grid& g, const BackgroundState& bg, const TwoForm& w,
                               const NormSpec& spec) {
  std::vector<Field> comps(w.c.begin(), w.c.end());
  return weighted_sobolev_norm_sq_vec(g, bg.r, comps, g2_density(bg), spec);
}

}  // namespace vel
