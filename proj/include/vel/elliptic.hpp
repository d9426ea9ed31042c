#pragma once

// Spacetime elliptic operator L_1, the "good" spatial operators L~_1, L~_2,
// L~_3, the decomposition L_1 = L~_1 + (subcritical terms), the k = 1
// commutator sources B_2 / C_2, and estimate-constant fitting.
//
// Time slots follow the same convention as dynamics.hpp: single-slice callers
// pass elimination closed forms; third-and-higher time derivatives (needed by
// the k = 1 sources) come from a short time series of slices, differenced in
// time with the step tied to h^2 so the overall error stays fourth order.

#include <variant>

#include "vel/dynamics.hpp"

namespace vel {

struct WrongFieldKind : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct GridDimTooLow : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct UnsupportedK : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct FamilyTooSmall : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class EllipticOpId { L1_full, L1_good, L2_good, L3_good };

inline Field elliptic_coef(const BackgroundState& bg) {
  return (bg.gas.gamma - 1.0) / (gamma_field(bg) + bg.r);
}

// mixed second derivative with a consistent discrete convention: pure
// directions use the single high-order stencil, mixed directions nest
inline Field d2(const Grid& g, const Field& f, int i, int j) {
  if (i >= g.dim() || j >= g.dim()) return Field::Zero(g.size());
  if (i == j) return g.diff(f, i, 2);
  return g.diff(g.diff(f, i, 1), j, 1);
}

inline Field d1(const Grid& g, const Field& f, int i) {
  if (i >= g.dim()) return Field::Zero(g.size());
  return g.diff(f, i, 1);
}

// H^{ij} = delta^{ij} - u^i u^j / (u^0)^2 as fields
inline std::array<std::array<Field, 3>, 3> h_tensor(const BackgroundState& bg) {
  const Field u0sq = u0_field(bg).square();
  std::array<std::array<Field, 3>, 3> H;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      H[i][j] = (i == j ? 1.0 : 0.0) - bg.u[i] * bg.u[j] / u0sq;
  return H;
}

// B^{alpha i} = g^{alpha i} - g^{alpha 0} u^i / u^0: B^{0i} = u^i/u^0,
// B^{ji} = delta^{ji}
inline std::array<Field, 3> b_row0(const BackgroundState& bg) {
  const Field u0 = u0_field(bg);
  return {bg.u[0] / u0, bg.u[1] / u0, bg.u[2] / u0};
}

// L~_1 r~ = coef H^{ij} (r d_i d_j r~ + 1/(gamma-1) d_i r d_j r~); the b >= 0
// variant absorbs an extra gradient term b coef H^{ij} d_i r d_j r~
inline Field apply_l1_good(const Grid& g, const BackgroundState& bg, const Field& rt,
                           double b = 0.0) {
  const auto H = h_tensor(bg);
  const double inv = 1.0 / (bg.gas.gamma - 1.0);
  Field acc = Field::Zero(g.size());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      acc += H[i][j] * (bg.r * d2(g, rt, i, j) + (inv + b) * d1(g, bg.r, i) * d1(g, rt, j));
  return elliptic_coef(bg) * acc;
}

// (L~_2 u~)^alpha = coef B^{alpha i} H^{jk} (d_i(r d_j u~_k) + 1/(gamma-1)
// d_j r d_i u~_k), expanded by the product rule so the pairing identity with
// L~_3 is exact algebra
inline std::array<Field, 4> apply_l2_good(const Grid& g, const BackgroundState& bg,
                                          const std::array<Field, 3>& ut) {
  const auto H = h_tensor(bg);
  const double inv = 1.0 / (bg.gas.gamma - 1.0);
  std::array<Field, 3> inner;  // contraction over j,k at fixed i
  for (int i = 0; i < 3; ++i) {
    inner[i] = Field::Zero(g.size());
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        inner[i] += H[j][k] * (bg.r * d2(g, ut[k], j, i) + d1(g, bg.r, i) * d1(g, ut[k], j) +
                               inv * d1(g, bg.r, j) * d1(g, ut[k], i));
  }
  const Field coef = elliptic_coef(bg);
  const auto B0 = b_row0(bg);
  std::array<Field, 4> out;
  out[0] = Field::Zero(g.size());
  for (int i = 0; i < 3; ++i) out[0] += B0[i] * coef * inner[i];
  for (int j = 0; j < 3; ++j) out[j + 1] = coef * inner[j];
  return out;
}

// (L~_3 u~)^alpha = coef B^{alpha i} r^{-1/(gamma-1)} H^{ml} d_l(r^{1+1/(gamma-1)}
// (d_m u~_i - d_i u~_m)); evaluated in product-rule form, which is finite at
// r = 0 and identical analytically
inline std::array<Field, 4> apply_l3_good(const Grid& g, const BackgroundState& bg,
                                          const std::array<Field, 3>& ut) {
  if (g.dim() < 2) throw GridDimTooLow("L3 needs at least two spatial dimensions");
  const auto H = h_tensor(bg);
  const double gam = bg.gas.gamma;
  const double lead = gam / (gam - 1.0);  // 1 + 1/(gamma-1)
  std::array<Field, 3> inner;
  for (int i = 0; i < 3; ++i) {
    inner[i] = Field::Zero(g.size());
    for (int m = 0; m < 3; ++m)
      for (int l = 0; l < 3; ++l) {
        const Field curl = d1(g, ut[i], m) - d1(g, ut[m], i);
        const Field dcurl = d2(g, ut[i], m, l) - d2(g, ut[m], i, l);
        inner[i] += H[m][l] * (lead * d1(g, bg.r, l) * curl + bg.r * dcurl);
      }
  }
  const Field coef = elliptic_coef(bg);
  const auto B0 = b_row0(bg);
  std::array<Field, 4> out;
  out[0] = Field::Zero(g.size());
  for (int i = 0; i < 3; ++i) out[0] += B0[i] * coef * inner[i];
  for (int j = 0; j < 3; ++j) out[j + 1] = coef * inner[j];
  return out;
}

// L_1 r~ = coef Pi^{mu nu} (r d_mu d_nu r~ + 1/(gamma-1) d_mu r d_nu r~)
// with explicit time slots: d.r = d_t r, dtrt = d_t r~, dt2rt = d_t^2 r~
inline Field apply_l1_full(const Grid& g, const BackgroundState& bg, const TimeDerivs& d,
                           const Field& rt, const Field& dtrt, const Field& dt2rt) {
  const Field u0 = u0_field(bg);
  const double inv = 1.0 / (bg.gas.gamma - 1.0);
  const Field pi00 = u0.square() - 1.0;
  Field acc = pi00 * (bg.r * dt2rt + inv * d.r * dtrt);
  for (int i = 0; i < 3; ++i) {
    const Field pii0 = bg.u[i] * u0;
    acc += pii0 * (2.0 * bg.r * d1(g, dtrt, i) + inv * (d.r * d1(g, rt, i) +
                                                        d1(g, bg.r, i) * dtrt));
    for (int j = 0; j < 3; ++j) {
      const Field piij = (i == j ? 1.0 : 0.0) + bg.u[i] * bg.u[j];
      acc += piij * (bg.r * d2(g, rt, i, j) + inv * d1(g, bg.r, i) * d1(g, rt, j));
    }
  }
  return elliptic_coef(bg) * acc;
}

// the subcritical remainder of L_1 = L~_1 + (remainder), term by term
inline Field l1_black_terms(const Grid& g, const BackgroundState& bg, const TimeDerivs& d,
                            const Field& rt, const Field& dtrt, const Field& dt2rt) {
  const double gam = bg.gas.gamma;
  const Field u0 = u0_field(bg);
  const Field u0sq = u0.square();
  const Field W = gamma_field(bg) + bg.r;
  const Field coef = elliptic_coef(bg);

  // material derivatives of the background entries
  std::array<Field, 3> du0;  // d_i u^0
  for (int i = 0; i < 3; ++i) {
    du0[i] = Field::Zero(g.size());
    for (int j = 0; j < 3; ++j) du0[i] += bg.u[j] * d1(g, bg.u[j], i);
    du0[i] /= u0;
  }
  Field Dtr = u0 * d.r, Dtu0 = u0 * d.u0;
  std::array<Field, 3> Dtu;
  for (int j = 0; j < 3; ++j) Dtu[j] = u0 * d.u[j];
  for (int i = 0; i < 3; ++i) {
    Dtr += bg.u[i] * d1(g, bg.r, i);
    Dtu0 += bg.u[i] * du0[i];
    for (int j = 0; j < 3; ++j) Dtu[j] += bg.u[i] * d1(g, bg.u[j], i);
  }

  // D_t r~ and D_t^2 r~ from the explicit time slots
  Field Dtrt = u0 * dtrt;
  for (int i = 0; i < 3; ++i) Dtrt += bg.u[i] * d1(g, rt, i);
  Field dtDtrt = d.u0 * dtrt + u0 * dt2rt;
  for (int i = 0; i < 3; ++i) dtDtrt += d.u[i] * d1(g, rt, i) + bg.u[i] * d1(g, dtrt, i);
  Field Dt2rt = u0 * dtDtrt;
  for (int i = 0; i < 3; ++i) Dt2rt += bg.u[i] * d1(g, Dtrt, i);

  Field acc = Field::Zero(g.size());
  // (1/(Gamma+r)) (1/(u^0)^2) D_t r u^j d_j r~
  for (int j = 0; j < 3; ++j) acc += Dtr * bg.u[j] * d1(g, rt, j) / (W * u0sq);
  // coef (Pi^{00}/(u^0)^2) ( r D_t^2 r~ - D_t u^0 r d_t r~ - D_t u^i r d_i r~
  //        - 2 u^i r d_i(D_t r~) - 2 u^i u^0 r D_t r~ d_i(1/u^0)
  //        + 2 u^i u^0 d_i(u^j/u^0) r d_j r~ )
  {
    const Field q = (u0sq - 1.0) / u0sq;
    Field inner = bg.r * Dt2rt - Dtu0 * bg.r * dtrt;
    for (int i = 0; i < 3; ++i) {
      inner -= Dtu[i] * bg.r * d1(g, rt, i) + 2.0 * bg.u[i] * bg.r * d1(g, Dtrt, i);
      const Field di_inv_u0 = -du0[i] / u0sq;
      inner -= 2.0 * bg.u[i] * u0 * bg.r * Dtrt * di_inv_u0;
      for (int j = 0; j < 3; ++j) {
        const Field diuj_over = d1(g, bg.u[j], i) / u0 - bg.u[j] * du0[i] / u0sq;
        inner += 2.0 * bg.u[i] * u0 * diuj_over * bg.r * d1(g, rt, j);
      }
    }
    acc += coef * q * inner;
  }
  // (1/((Gamma+r) u^0)) Pi^{00} d_t r D_t r~
  acc += (u0sq - 1.0) * d.r * Dtrt / (W * u0);
  // 2 coef r u^i d_i(D_t r~) + 2 coef u^i u^0 [r D_t r~ d_i(1/u^0)
  //                                            - d_i(u^j/u^0) r d_j r~]
  for (int i = 0; i < 3; ++i) {
    acc += 2.0 * (gam - 1.0) / W * bg.r * bg.u[i] * d1(g, Dtrt, i);
    Field bracket = -bg.r * Dtrt * du0[i] / u0sq;
    for (int j = 0; j < 3; ++j)
      bracket -= (d1(g, bg.u[j], i) / u0 - bg.u[j] * du0[i] / u0sq) * bg.r * d1(g, rt, j);
    acc += 2.0 * (gam - 1.0) / W * bg.u[i] * u0 * bracket;
  }
  // (1/((Gamma+r) u^0)) Pi^{i0} d_i r D_t r~
  for (int i = 0; i < 3; ++i) acc += bg.u[i] * d1(g, bg.r, i) * Dtrt / W;
  return acc;
}

inline Field decomposition_residual(const Grid& g, const BackgroundState& bg,
                                    const TimeDerivs& d, const Field& rt, const Field& dtrt,
                                    const Field& dt2rt) {
  return apply_l1_full(g, bg, d, rt, dtrt, dt2rt) - apply_l1_good(g, bg, rt) -
         l1_black_terms(g, bg, d, rt, dtrt, dt2rt);
}

// dispatcher matching the CLI surface
using EllipticField = std::variant<Field, std::array<Field, 3>>;

inline std::array<Field, 4> apply_elliptic(EllipticOpId op, const Grid& g,
                                           const BackgroundState& bg,
                                           const EllipticField& f) {
  if (op == EllipticOpId::L1_good || op == EllipticOpId::L1_full) {
    if (!std::holds_alternative<Field>(f))
      throw WrongFieldKind("L1 operators act on scalar fields");
    const Field& rt = std::get<Field>(f);
    if (op == EllipticOpId::L1_full) {
      // eliminate the time slots on the current slice
      LinearizedState lin = zero_linearized(g);
      lin.r = rt;
      const Forcing Z = zero_forcing(g);
      const auto d = nonlinear_time_derivatives(g, bg, Z);
      const auto dl = linearized_time_derivatives(g, bg, lin, Z, Z);
      const auto deep = deep_time_derivatives(g, bg, lin, Z, Z, Z, Z);
      return {apply_l1_full(g, bg, d, rt, dl.r, deep.lin2.r), Field::Zero(g.size()),
              Field::Zero(g.size()), Field::Zero(g.size())};
    }
    return {apply_l1_good(g, bg, rt), Field::Zero(g.size()), Field::Zero(g.size()),
            Field::Zero(g.size())};
  }
  if (!std::holds_alternative<std::array<Field, 3>>(f))
    throw WrongFieldKind("L2/L3 operators act on velocity fields");
  const auto& ut = std::get<std::array<Field, 3>>(f);
  return op == EllipticOpId::L2_good ? apply_l2_good(g, bg, ut) : apply_l3_good(g, bg, ut);
}

// ---------------------------------------------------------------------------
// div-curl pairing: grouped G-contraction of (L~_2 + L~_3) u~ versus the
// direct H^3 expansion of the bracket products; equal by G B B = H

inline Field divcurl_pair_grouped(const Grid& g, const BackgroundState& bg,
                                  const std::array<Field, 3>& ut) {
  const auto l2 = apply_l2_good(g, bg, ut);
  const auto l3 = apply_l3_good(g, bg, ut);
  return g_norm_sq_field(bg, l2[0] + l3[0], l2[1] + l3[1], l2[2] + l3[2], l2[3] + l3[3]);
}

inline Field divcurl_pair_expanded(const Grid& g, const BackgroundState& bg,
                                   const std::array<Field, 3>& ut) {
  const auto H = h_tensor(bg);
  const double gam = bg.gas.gamma;
  const double inv = 1.0 / (gam - 1.0), lead = gam / (gam - 1.0);
  auto bracket = [&](int i, int j, int k) {
    return Field(bg.r * d2(g, ut[k], j, i) + d1(g, bg.r, i) * d1(g, ut[k], j) +
                 inv * d1(g, bg.r, j) * d1(g, ut[k], i) + bg.r * d2(g, ut[i], j, k) -
                 bg.r * d2(g, ut[j], i, k) +
                 lead * (d1(g, bg.r, k) * d1(g, ut[i], j) - d1(g, bg.r, k) * d1(g, ut[j], i)));
  };
  const Field c2 = elliptic_coef(bg).square();
  Field acc = Field::Zero(g.size());
  for (int i = 0; i < 3; ++i)
    for (int a = 0; a < 3; ++a)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l)
            for (int n = 0; n < 3; ++n)
              acc += c2 * H[i][a] * H[j][k] * H[l][n] * bracket(i, j, k) * bracket(a, l, n);
  return acc;
}

// ---------------------------------------------------------------------------
// higher-order commutator sources B_2k, C_2k at k = 1 from a time series

struct HigherSources {
  Field B2k;
  std::array<Field, 4> C2k;
};

struct SliceSeries {
  const Grid* grid = nullptr;
  double dt = 0;
  std::vector<BackgroundState> bg;
  std::vector<LinearizedState> lin;
  int center() const { return static_cast<int>(bg.size()) / 2; }
};

// a field known on every slice; margin counts slices invalidated at each end
// by time differencing
struct SeriesField {
  std::vector<Field> v;
  int m = 0;
};

namespace series_detail {

template <class Fn>
SeriesField lift(const SliceSeries& s, Fn&& fn) {
  SeriesField out;
  out.v.reserve(s.bg.size());
  for (int i = 0; i < static_cast<int>(s.bg.size()); ++i) out.v.push_back(fn(i));
  return out;
}

inline SeriesField ddt(const SliceSeries& s, const SeriesField& f) {
  SeriesField out;
  out.m = f.m + 1;
  out.v.resize(f.v.size());
  for (int i = 0; i < static_cast<int>(f.v.size()); ++i) {
    if (i < out.m || i >= static_cast<int>(f.v.size()) - out.m)
      out.v[i] = Field::Zero(f.v[0].size());
    else
      out.v[i] = (f.v[i + 1] - f.v[i - 1]) / (2.0 * s.dt);
  }
  return out;
}

inline SeriesField dx(const SliceSeries& s, const SeriesField& f, int dir) {
  SeriesField out;
  out.m = f.m;
  out.v.resize(f.v.size());
  for (std::size_t i = 0; i < f.v.size(); ++i) out.v[i] = d1(*s.grid, f.v[i], dir);
  return out;
}

// spacetime partial: mu = 0 is d_t, mu = i+1 is d_i
inline SeriesField dmu(const SliceSeries& s, const SeriesField& f, int mu) {
  return mu == 0 ? ddt(s, f) : dx(s, f, mu - 1);
}

inline SeriesField mul(const SeriesField& a, const SeriesField& b) {
  SeriesField out;
  out.m = std::max(a.m, b.m);
  out.v.resize(a.v.size());
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

inline SeriesField add(const SeriesField& a, const SeriesField& b) {
  SeriesField out;
  out.m = std::max(a.m, b.m);
  out.v.resize(a.v.size());
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] + b.v[i];
  return out;
}

inline SeriesField sub(const SeriesField& a, const SeriesField& b) {
  SeriesField out;
  out.m = std::max(a.m, b.m);
  out.v.resize(a.v.size());
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] - b.v[i];
  return out;
}

inline SeriesField scale(double c, const SeriesField& a) {
  SeriesField out;
  out.m = a.m;
  out.v.resize(a.v.size());
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = c * a.v[i];
  return out;
}

inline SeriesField Dt(const SliceSeries& s, const SeriesField& f) {
  const SeriesField u0 = lift(s, [&](int i) { return u0_field(s.bg[i]); });
  SeriesField out = mul(u0, ddt(s, f));
  for (int j = 0; j < 3; ++j) {
    const SeriesField uj = lift(s, [&](int i) { return s.bg[i].u[j]; });
    out = add(out, mul(uj, dx(s, f, j)));
  }
  return out;
}

// the four spacetime velocity component series u^mu
inline std::array<SeriesField, 4> u_series(const SliceSeries& s) {
  std::array<SeriesField, 4> u;
  u[0] = lift(s, [&](int i) { return u0_field(s.bg[i]); });
  for (int j = 0; j < 3; ++j) u[j + 1] = lift(s, [&](int i) { return s.bg[i].u[j]; });
  return u;
}

inline std::array<SeriesField, 4> ut_series(const SliceSeries& s) {
  std::array<SeriesField, 4> ut;
  ut[0] = lift(s, [&](int i) { return lin_u0_field(s.bg[i], s.lin[i].u); });
  for (int j = 0; j < 3; ++j) ut[j + 1] = lift(s, [&](int i) { return s.lin[i].u[j]; });
  return ut;
}

// [D_t, d_mu] phi = -d_mu u^nu d_nu phi
inline SeriesField comm_dt_dmu(const SliceSeries& s, const SeriesField& phi, int mu) {
  const auto u = u_series(s);
  SeriesField out;
  for (int nu = 0; nu < 4; ++nu) {
    const SeriesField t = mul(dmu(s, u[nu], mu), dmu(s, phi, nu));
    out = nu == 0 ? scale(-1.0, t) : sub(out, t);
  }
  return out;
}

// [D_t^2, d_mu] phi = D_t [D_t, d_mu] phi + [D_t, d_mu] (D_t phi)
inline SeriesField comm_dt2_dmu(const SliceSeries& s, const SeriesField& phi, int mu) {
  return add(Dt(s, comm_dt_dmu(s, phi, mu)), comm_dt_dmu(s, Dt(s, phi), mu));
}

}  // namespace series_detail

// B_2 and C_2^alpha evaluated at the center slice of the series
inline HigherSources higher_sources_k1(const SliceSeries& s) {
  namespace sd = series_detail;
  if (s.bg.size() < 9 || s.bg.size() % 2 == 0)
    throw SeriesTooShort("k = 1 sources need an odd series of at least 9 slices");
  const Grid& g = *s.grid;
  const double gam = s.bg[0].gas.gamma;
  const int c = s.center();

  // per-slice linearized sources g, h^alpha (unforced background)
  std::vector<LinearizedSources> src;
  src.reserve(s.bg.size());
  for (std::size_t i = 0; i < s.bg.size(); ++i)
    src.push_back(linearized_sources(g, s.bg[i], s.lin[i], zero_forcing(g)));

  const SeriesField gsrc = sd::lift(s, [&](int i) { return src[i].g; });
  const SeriesField r = sd::lift(s, [&](int i) { return s.bg[i].r; });
  const SeriesField rt = sd::lift(s, [&](int i) { return s.lin[i].r; });
  const auto ut = sd::ut_series(s);

  // D_t powers of the linearized velocity components and of r
  std::array<SeriesField, 4> Dtut;
  for (int a = 0; a < 4; ++a) Dtut[a] = sd::Dt(s, ut[a]);
  const SeriesField Dtr = sd::Dt(s, r);
  const SeriesField Dt2r = sd::Dt(s, Dtr);

  // B_2 = D_t^2 g - sum_{i=0}^{1} (D_t^i u~^mu d_mu(D_t^{2-i} r)
  //                                 - D_t^{2-i} r d_mu(D_t^i u~^mu))
  //       - sum_{i=0}^{1} D_t^i u~^mu [D_t^{2-i}, d_mu] r
  //       - (gamma-1) sum_{i=1}^{2} D_t^{2-i} r [D_t^i, d_mu] u~^mu
  // Leibniz binomial weights are kept explicit; the mixed D_t products carry a
  // factor 2 and the divergence members carry the (gamma-1) of the equation
  SeriesField B2 = sd::Dt(s, sd::Dt(s, gsrc));
  for (int i = 0; i <= 1; ++i) {
    const double w = i == 0 ? 1.0 : 2.0;
    const auto& uti = i == 0 ? ut : Dtut;
    const SeriesField& rpow = i == 0 ? Dt2r : Dtr;  // D_t^{2-i} r
    for (int mu = 0; mu < 4; ++mu) {
      B2 = sd::sub(B2, sd::scale(w, sd::mul(uti[mu], sd::dmu(s, rpow, mu))));
      B2 = sd::sub(B2, sd::scale(w * (gam - 1.0), sd::mul(rpow, sd::dmu(s, uti[mu], mu))));
      const SeriesField comm =
          i == 0 ? sd::comm_dt2_dmu(s, r, mu) : sd::comm_dt_dmu(s, r, mu);
      B2 = sd::sub(B2, sd::scale(w, sd::mul(uti[mu], comm)));
    }
  }
  for (int i = 1; i <= 2; ++i) {
    const double w = i == 1 ? 2.0 : 1.0;
    const SeriesField& rpow = i == 1 ? Dtr : r;  // D_t^{2-i} r
    for (int mu = 0; mu < 4; ++mu) {
      const SeriesField comm =
          i == 1 ? sd::comm_dt_dmu(s, ut[mu], mu) : sd::comm_dt2_dmu(s, ut[mu], mu);
      B2 = sd::sub(B2, sd::scale(w * (gam - 1.0), sd::mul(rpow, comm)));
    }
  }

  // C_2^alpha = D_t^2 h^alpha
  //             - sum_{i=0}^{1} D_t^{2-i}(Pi^{alpha mu}/(Gamma+r)) d_mu(D_t^i r~)
  //             - sum_{i=1}^{2} D_t^{2-i}(Pi^{alpha mu}/(Gamma+r)) [D_t^i, d_mu] r~
  const SeriesField Dtrt = sd::Dt(s, rt);
  HigherSources out;
  std::array<Field, 4> C2;
  for (int a = 0; a < 4; ++a) {
    const SeriesField ha = sd::lift(s, [&](int i) { return src[i].h[a]; });
    SeriesField Ca = sd::Dt(s, sd::Dt(s, ha));
    for (int mu = 0; mu < 4; ++mu) {
      const SeriesField pi = sd::lift(s, [&](int i) {
        const Field u0 = u0_field(s.bg[i]);
        const Field ua = a == 0 ? u0 : s.bg[i].u[a - 1];
        const Field umu = mu == 0 ? u0 : s.bg[i].u[mu - 1];
        const Field W = gamma_field(s.bg[i]) + s.bg[i].r;
        return Field((minkowski(a, mu) + ua * umu) / W);
      });
      const SeriesField Dtpi = sd::Dt(s, pi);
      const SeriesField Dt2pi = sd::Dt(s, Dtpi);
      // first sum: i = 0 pairs D_t^2 pi with d_mu r~; i = 1 pairs D_t pi
      // (binomial weight 2 on the mixed products)
      Ca = sd::sub(Ca, sd::mul(Dt2pi, sd::dmu(s, rt, mu)));
      Ca = sd::sub(Ca, sd::scale(2.0, sd::mul(Dtpi, sd::dmu(s, Dtrt, mu))));
      // second sum: i = 1 uses D_t pi, i = 2 uses pi
      Ca = sd::sub(Ca, sd::scale(2.0, sd::mul(Dtpi, sd::comm_dt_dmu(s, rt, mu))));
      Ca = sd::sub(Ca, sd::mul(pi, sd::comm_dt2_dmu(s, rt, mu)));
    }
    C2[a] = Ca.v[c];
  }
  out.B2k = B2.v[c];
  out.C2k = C2;
  return out;
}

// unified entry point; k = 0 needs no series
inline HigherSources higher_sources(const Grid& g, const BackgroundState& bg,
                                    const LinearizedState& lin, int k,
                                    const SliceSeries* series = nullptr) {
  if (k >= 2) throw UnsupportedK("numerical sources capped at k = 1");
  if (k < 0) throw UnsupportedK("k must be nonnegative");
  if (k == 0) {
    const auto src = linearized_sources(g, bg, lin, zero_forcing(g));
    return {src.g, src.h};
  }
  if (!series) throw MissingTimeDerivative("k = 1 sources need a slice series");
  return higher_sources_k1(*series);
}

// residuals of the k = 1 commuted system at the center slice:
//   D_t(D_t^2 r~) + (D_t^2 u~^mu) d_mu r + (gamma-1) r d_mu(D_t^2 u~^mu) = B_2
//   D_t(D_t^2 u~^alpha) + (Pi^{alpha mu}/(Gamma+r)) d_mu(D_t^2 r~) = C_2^alpha
struct K1SystemResidual {
  Field r_eq;
  std::array<Field, 4> u_eq;
};

inline K1SystemResidual k1_system_residual(const SliceSeries& s) {
  namespace sd = series_detail;
  const Grid& g = *s.grid;
  const double gam = s.bg[0].gas.gamma;
  const int c = s.center();
  const HigherSources hs = higher_sources_k1(s);

  const SeriesField r = sd::lift(s, [&](int i) { return s.bg[i].r; });
  const SeriesField rt = sd::lift(s, [&](int i) { return s.lin[i].r; });
  const auto ut = sd::ut_series(s);
  const SeriesField Dt2rt = sd::Dt(s, sd::Dt(s, rt));
  std::array<SeriesField, 4> Dt2ut;
  for (int a = 0; a < 4; ++a) Dt2ut[a] = sd::Dt(s, sd::Dt(s, ut[a]));

  SeriesField req = sd::Dt(s, Dt2rt);
  for (int mu = 0; mu < 4; ++mu) {
    req = sd::add(req, sd::mul(Dt2ut[mu], sd::dmu(s, r, mu)));
    req = sd::add(req, sd::scale(gam - 1.0, sd::mul(r, sd::dmu(s, Dt2ut[mu], mu))));
  }

  K1SystemResidual out;
  out.r_eq = req.v[c] - hs.B2k;
  for (int a = 0; a < 4; ++a) {
    SeriesField ueq = sd::Dt(s, Dt2ut[a]);
    for (int mu = 0; mu < 4; ++mu) {
      const SeriesField pi = sd::lift(s, [&](int i) {
        const Field u0 = u0_field(s.bg[i]);
        const Field ua = a == 0 ? u0 : s.bg[i].u[a - 1];
        const Field umu = mu == 0 ? u0 : s.bg[i].u[mu - 1];
        const Field W = gamma_field(s.bg[i]) + s.bg[i].r;
        return Field((minkowski(a, mu) + ua * umu) / W);
      });
      ueq = sd::add(ueq, sd::mul(pi, sd::dmu(s, Dt2rt, mu)));
    }
    out.u_eq[a] = ueq.v[c] - hs.C2k[a];
  }
  return out;
}

// ---------------------------------------------------------------------------
// estimate-constant fitting: sup of lhs/rhs over a family of test members

template <class Member, class LhsFn, class RhsFn>
double estimate_constant_fit(const std::vector<Member>& family, LhsFn&& lhs, RhsFn&& rhs,
                             std::size_t min_size = 50) {
  if (family.size() < min_size) throw FamilyTooSmall("estimate fit family too small");
  double sup = 0.0;
  for (const Member& m : family) {
    const double denom = rhs(m);
    if (denom <= 0.0) continue;  // degenerate member (zero field) rejected
    sup = std::max(sup, lhs(m) / denom);
  }
  return sup;
}

}  // namespace vel
