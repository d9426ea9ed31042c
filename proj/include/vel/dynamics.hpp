#pragma once

// Right-hand sides of the nonlinear system and its linearization.  The time
// derivatives are eliminated in closed form (the implicit system couples
// dt r and dt u^j through the derived u^0); the same templated routine run on
// dual scalars produces the linearized time derivatives, so nonlinear and
// linearized dynamics cannot drift apart.

#include <functional>

#include "vel/fields.hpp"
#include "vel/geometry.hpp"
#include "vel/norms.hpp"

namespace vel {

struct DegenerateA1 : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CflViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SeriesTooShort : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BoundaryVelocityNonzero : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingTimeDerivative : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// pointwise elimination

template <class T>
struct PointState {
  T s{}, r{};
  T u[3] = {};
  T ds[3] = {}, dr[3] = {};  // spatial gradients; unused directions stay zero
  T du[3][3] = {};           // du[j][i] = d_i u^j
  T Fs{}, Fr{};
  T Fu[3] = {};
};

template <class T>
struct PointDerivs {
  T dts{}, dtr{};
  T dtu[3] = {};
  T dtu0{}, a1{};
};

template <class T>
PointDerivs<T> eliminate_time_derivatives(const PointState<T>& q, const GasParams& gp) {
  const double gm1 = gp.gamma - 1.0;
  const T u0 = sqrt(T(1) + q.u[0] * q.u[0] + q.u[1] * q.u[1] + q.u[2] * q.u[2]);
  const T Gam = gamma_of_entropy(q.s, gp);
  const T W = Gam + q.r;

  T diu0[3];
  for (int i = 0; i < 3; ++i) {
    diu0[i] = T(0);
    for (int j = 0; j < 3; ++j) diu0[i] += q.u[j] * q.du[j][i];
    diu0[i] = diu0[i] / u0;
  }

  PointDerivs<T> out;
  T adv_s{}, adv_r{}, divu{}, uFu{}, udiu0{};
  for (int i = 0; i < 3; ++i) {
    adv_s += q.u[i] * q.ds[i];
    adv_r += q.u[i] * q.dr[i];
    divu += q.du[i][i];
    uFu += q.u[i] * q.Fu[i];
    udiu0 += q.u[i] * diu0[i];
  }
  out.dts = (q.Fs - adv_s) / u0;

  out.a1 = u0 - T(gm1) * q.r * (u0 * u0 - T(1)) / (W * u0);
  if (value_of(out.a1) <= 1e-8) throw DegenerateA1("a1 too small: smallness assumption violated");
  const T rhs_r = q.Fr - T(gm1) * q.r * uFu / (u0 * u0) -
                  adv_r * (T(1) - T(gm1) * q.r / W) - T(gm1) * q.r * (divu - udiu0 / u0);
  out.dtr = rhs_r / out.a1;

  for (int j = 0; j < 3; ++j) {
    T adv_uj{}, pir{};
    for (int i = 0; i < 3; ++i) {
      adv_uj += q.u[i] * q.du[j][i];
      pir += (T(i == j ? 1 : 0) + q.u[j] * q.u[i]) * q.dr[i];
    }
    out.dtu[j] = (q.Fu[j] - adv_uj - (q.u[j] * u0 * out.dtr + pir) / W) / u0;
  }
  out.dtu0 = (q.u[0] * out.dtu[0] + q.u[1] * out.dtu[1] + q.u[2] * out.dtu[2]) / u0;
  return out;
}

// ---------------------------------------------------------------------------
// field-level plumbing

struct Forcing {
  Field Fs, Fr;
  std::array<Field, 3> Fu;
};

inline Forcing zero_forcing(const Grid& g) {
  Forcing f;
  f.Fs = Field::Zero(g.size());
  f.Fr = Field::Zero(g.size());
  for (auto& c : f.Fu) c = Field::Zero(g.size());
  return f;
}

struct TimeDerivs {
  Field s, r;
  std::array<Field, 3> u;
  Field u0, a1;
};

struct SpatialGrads {
  std::array<Field, 3> ds, dr;             // per spatial direction
  std::array<std::array<Field, 3>, 3> du;  // du[j][dir]
};

inline SpatialGrads spatial_grads(const Grid& g, const Field& s, const Field& r,
                                  const std::array<Field, 3>& u) {
  SpatialGrads sg;
  for (int d = 0; d < 3; ++d) {
    if (d < g.dim()) {
      sg.ds[d] = g.diff(s, d, 1);
      sg.dr[d] = g.diff(r, d, 1);
      for (int j = 0; j < 3; ++j) sg.du[j][d] = g.diff(u[j], d, 1);
    } else {
      sg.ds[d] = Field::Zero(g.size());
      sg.dr[d] = Field::Zero(g.size());
      for (int j = 0; j < 3; ++j) sg.du[j][d] = Field::Zero(g.size());
    }
  }
  return sg;
}

inline TimeDerivs nonlinear_time_derivatives(const Grid& g, const BackgroundState& bg,
                                             const Forcing& F) {
  const SpatialGrads sg = spatial_grads(g, bg.s, bg.r, bg.u);
  TimeDerivs out;
  out.s.resize(g.size());
  out.r.resize(g.size());
  for (auto& c : out.u) c.resize(g.size());
  out.u0.resize(g.size());
  out.a1.resize(g.size());
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    PointState<double> q;
    q.s = bg.s[p];
    q.r = bg.r[p];
    q.Fs = F.Fs[p];
    q.Fr = F.Fr[p];
    for (int j = 0; j < 3; ++j) {
      q.u[j] = bg.u[j][p];
      q.ds[j] = sg.ds[j][p];
      q.dr[j] = sg.dr[j][p];
      q.Fu[j] = F.Fu[j][p];
      for (int i = 0; i < 3; ++i) q.du[j][i] = sg.du[j][i][p];
    }
    const auto d = eliminate_time_derivatives(q, bg.gas);
    out.s[p] = d.dts;
    out.r[p] = d.dtr;
    for (int j = 0; j < 3; ++j) out.u[j][p] = d.dtu[j];
    out.u0[p] = d.dtu0;
    out.a1[p] = d.a1;
  }
  return out;
}

// linearized time derivatives by dual transport through the same elimination
inline TimeDerivs linearized_time_derivatives(const Grid& g, const BackgroundState& bg,
                                              const LinearizedState& lin, const Forcing& F,
                                              const Forcing& Ft) {
  using D = Dual<double>;
  const SpatialGrads sg = spatial_grads(g, bg.s, bg.r, bg.u);
  const SpatialGrads sgt = spatial_grads(g, lin.s, lin.r, lin.u);
  TimeDerivs out;
  out.s.resize(g.size());
  out.r.resize(g.size());
  for (auto& c : out.u) c.resize(g.size());
  out.u0.resize(g.size());
  out.a1.resize(g.size());
  for (Eigen::Index p = 0; p < g.size(); ++p) {
    PointState<D> q;
    q.s = D(bg.s[p], lin.s[p]);
    q.r = D(bg.r[p], lin.r[p]);
    q.Fs = D(F.Fs[p], Ft.Fs[p]);
    q.Fr = D(F.Fr[p], Ft.Fr[p]);
    for (int j = 0; j < 3; ++j) {
      q.u[j] = D(bg.u[j][p], lin.u[j][p]);
      q.ds[j] = D(sg.ds[j][p], sgt.ds[j][p]);
      q.dr[j] = D(sg.dr[j][p], sgt.dr[j][p]);
      q.Fu[j] = D(F.Fu[j][p], Ft.Fu[j][p]);
      for (int i = 0; i < 3; ++i) q.du[j][i] = D(sg.du[j][i][p], sgt.du[j][i][p]);
    }
    const auto d = eliminate_time_derivatives(q, bg.gas);
    out.s[p] = d.dts.d;
    out.r[p] = d.dtr.d;
    for (int j = 0; j < 3; ++j) out.u[j][p] = d.dtu[j].d;
    out.u0[p] = d.dtu0.d;  // dt of the linearized zero component
    out.a1[p] = d.a1.v;
  }
  return out;
}

// D_t phi = u^0 dt phi + u^i d_i phi
inline Field dt_apply(const Grid& g, const BackgroundState& bg, const Field& phi,
                      const Field& dtphi) {
  Field out = u0_field(bg) * dtphi;
  for (int d = 0; d < g.dim(); ++d) out += bg.u[d] * g.diff(phi, d, 1);
  return out;
}

// ---------------------------------------------------------------------------
// linearized sources f, g, h^alpha

struct LinearizedSources {
  Field f, g;
  std::array<Field, 4> h;
};

inline LinearizedSources linearized_sources(const Grid& g, const BackgroundState& bg,
                                            const LinearizedState& lin, const Forcing& F) {
  const TimeDerivs d = nonlinear_time_derivatives(g, bg, F);
  const SpatialGrads sg = spatial_grads(g, bg.s, bg.r, bg.u);
  const Field u0 = u0_field(bg);
  const Field ut0 = lin_u0_field(bg, lin.u);
  const Field Gam = gamma_field(bg);
  const Field W = Gam + bg.r;
  const Field Gp = -bg.gas.em() * Gam;

  // 4-component background derivatives: index 0 is time
  std::array<Field, 4> du_mu[4];  // du_mu[alpha][mu] = d_mu u^alpha
  std::array<Field, 4> dr_mu, ds_mu;
  dr_mu[0] = d.r;
  ds_mu[0] = d.s;
  du_mu[0][0] = d.u0;
  for (int j = 0; j < 3; ++j) du_mu[j + 1][0] = d.u[j];
  for (int i = 0; i < 3; ++i) {
    dr_mu[i + 1] = sg.dr[i];
    ds_mu[i + 1] = sg.ds[i];
    Field di_u0 = Field::Zero(g.size());
    for (int j = 0; j < 3; ++j) di_u0 += bg.u[j] * sg.du[j][i];
    du_mu[0][i + 1] = di_u0 / u0;
    for (int j = 0; j < 3; ++j) du_mu[j + 1][i + 1] = sg.du[j][i];
  }

  const std::array<Field, 4> utc = {ut0, lin.u[0], lin.u[1], lin.u[2]};
  const std::array<Field, 4> uc = {u0, bg.u[0], bg.u[1], bg.u[2]};

  LinearizedSources out;
  out.f = Field::Zero(g.size());
  for (int mu = 0; mu < 4; ++mu) out.f -= utc[mu] * ds_mu[mu];

  Field divu = du_mu[0][0];
  for (int i = 0; i < 3; ++i) divu += du_mu[i + 1][i + 1];
  out.g = -(bg.gas.gamma - 1.0) * lin.r * divu;

  for (int a = 0; a < 4; ++a) {
    Field h = Field::Zero(g.size());
    Field pi_dr = Field::Zero(g.size());  // Pi^{a mu} d_mu r
    for (int mu = 0; mu < 4; ++mu) {
      const double gm = minkowski(a, mu);
      const Field Pi = gm + uc[a] * uc[mu];
      pi_dr += Pi * dr_mu[mu];
      h -= utc[mu] * du_mu[a][mu];
      h -= (utc[a] * uc[mu] + uc[a] * utc[mu]) * dr_mu[mu] / W;
    }
    h += (Gp / W.square()) * lin.s * pi_dr;
    h += lin.r * pi_dr / W.square();
    out.h[a] = h;
  }
  return out;
}

// ---------------------------------------------------------------------------
// manufactured forcing: F = LHS(analytic background), assembled from supplied
// closed-form time and space derivatives

inline Forcing manufactured_forcing(const Grid& g, const BackgroundState& bg,
                                    const std::array<Field, 3>& dtu_an, const Field& dts_an,
                                    const Field& dtr_an, const SpatialGrads& sg,
                                    bool fixed_domain = true) {
  const Field u0 = u0_field(bg);
  if (fixed_domain && !g.axes[g.dim() - 1].periodic) {
    // zero normal velocity at the interval ends
    const int dir = g.dim() - 1;
    double worst = 0;
    const int n0 = g.dim() == 2 ? g.axes[0].n : 1;
    const int n1 = g.axes[g.dim() - 1].n;
    for (int i = 0; i < n0; ++i) {
      worst = std::max(worst, std::abs(bg.u[dir][g.dim() == 2 ? g.idx(i, 0) : 0]));
      worst = std::max(worst, std::abs(bg.u[dir][g.dim() == 2 ? g.idx(i, n1 - 1) : n1 - 1]));
    }
    if (worst > 1e-12)
      throw BoundaryVelocityNonzero("manufactured background moves the fixed boundary");
  }
  const Field Gam = gamma_field(bg);
  const Field W = Gam + bg.r;
  Field dtu0 = Field::Zero(g.size());
  for (int j = 0; j < 3; ++j) dtu0 += bg.u[j] * dtu_an[j];
  dtu0 /= u0;

  Forcing F;
  F.Fs = u0 * dts_an;
  F.Fr = u0 * dtr_an + (bg.gas.gamma - 1.0) * bg.r * dtu0;
  Field divu_sp = Field::Zero(g.size());
  for (int i = 0; i < 3; ++i) {
    F.Fs += bg.u[i] * sg.ds[i];
    F.Fr += bg.u[i] * sg.dr[i];
    divu_sp += sg.du[i][i];
  }
  F.Fr += (bg.gas.gamma - 1.0) * bg.r * divu_sp;
  for (int j = 0; j < 3; ++j) {
    Field f = u0 * dtu_an[j] + bg.u[j] * u0 * dtr_an / W;
    for (int i = 0; i < 3; ++i) {
      f += bg.u[i] * sg.du[j][i];
      f += ((i == j ? 1.0 : 0.0) + bg.u[j] * bg.u[i]) * sg.dr[i] / W;
    }
    F.Fu[j] = f;
  }
  return F;
}

// ---------------------------------------------------------------------------
// time stepping

inline double max_wave_speed(const BackgroundState& bg) {
  const Field c = (bg.gas.gamma - 1.0) * bg.r / (gamma_field(bg) + bg.r);
  const Field sp = (bg.u[0].square() + bg.u[1].square() + bg.u[2].square()).sqrt();
  return (c.sqrt() + sp).maxCoeff();
}

inline double min_spacing(const Grid& g) {
  double h = 1e300;
  for (int a = 0; a < g.dim(); ++a) {
    if (g.axes[a].periodic)
      h = std::min(h, g.axes[a].length / g.axes[a].n);
    else
      for (int i = 0; i + 1 < g.axes[a].n; ++i) h = std::min(h, g.x[a][i + 1] - g.x[a][i]);
  }
  return h;
}

inline void cfl_guard(const Grid& g, const BackgroundState& bg, double dt) {
  const double c = max_wave_speed(bg);
  if (c > 0 && dt > 0.5 * min_spacing(g) / c) throw CflViolated("dt exceeds 0.5 h / wavespeed");
}

using ForcingFn = std::function<Forcing(double)>;

// classical RK4 on the nonlinear background
inline BackgroundState step_rk4(const Grid& g, const BackgroundState& bg, const ForcingFn& F,
                                double dt) {
  cfl_guard(g, bg, dt);
  auto add = [&](const BackgroundState& b, const TimeDerivs& d, double a) {
    BackgroundState o = b;
    o.s += a * d.s;
    o.r += a * d.r;
    for (int j = 0; j < 3; ++j) o.u[j] += a * d.u[j];
    o.t = b.t + a;
    return o;
  };
  const TimeDerivs k1 = nonlinear_time_derivatives(g, bg, F(bg.t));
  const BackgroundState b2 = add(bg, k1, 0.5 * dt);
  const TimeDerivs k2 = nonlinear_time_derivatives(g, b2, F(bg.t + 0.5 * dt));
  const BackgroundState b3 = add(bg, k2, 0.5 * dt);
  const TimeDerivs k3 = nonlinear_time_derivatives(g, b3, F(bg.t + 0.5 * dt));
  const BackgroundState b4 = add(bg, k3, dt);
  const TimeDerivs k4 = nonlinear_time_derivatives(g, b4, F(bg.t + dt));
  BackgroundState out = bg;
  out.s += dt / 6.0 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s);
  out.r += dt / 6.0 * (k1.r + 2 * k2.r + 2 * k3.r + k4.r);
  for (int j = 0; j < 3; ++j)
    out.u[j] += dt / 6.0 * (k1.u[j] + 2 * k2.u[j] + 2 * k3.u[j] + k4.u[j]);
  out.t = bg.t + dt;
  return out;
}

using BackgroundFn = std::function<BackgroundState(double)>;

// RK4 for the linearized state over a (possibly time-dependent) background
inline LinearizedState step_rk4_linearized(const Grid& g, const BackgroundFn& bgf,
                                           const ForcingFn& F, const ForcingFn& Ft,
                                           const LinearizedState& lin, double dt) {
  cfl_guard(g, bgf(lin.t), dt);
  auto rhs = [&](const LinearizedState& l, double t) {
    return linearized_time_derivatives(g, bgf(t), l, F(t), Ft(t));
  };
  auto add = [&](const LinearizedState& l, const TimeDerivs& d, double a) {
    LinearizedState o = l;
    o.s += a * d.s;
    o.r += a * d.r;
    for (int j = 0; j < 3; ++j) o.u[j] += a * d.u[j];
    o.t = l.t + a;
    return o;
  };
  const TimeDerivs k1 = rhs(lin, lin.t);
  const TimeDerivs k2 = rhs(add(lin, k1, 0.5 * dt), lin.t + 0.5 * dt);
  const TimeDerivs k3 = rhs(add(lin, k2, 0.5 * dt), lin.t + 0.5 * dt);
  const TimeDerivs k4 = rhs(add(lin, k3, dt), lin.t + dt);
  LinearizedState out = lin;
  out.s += dt / 6.0 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s);
  out.r += dt / 6.0 * (k1.r + 2 * k2.r + 2 * k3.r + k4.r);
  for (int j = 0; j < 3; ++j)
    out.u[j] += dt / 6.0 * (k1.u[j] + 2 * k2.u[j] + 2 * k3.u[j] + k4.u[j]);
  out.t = lin.t + dt;
  return out;
}

// ---------------------------------------------------------------------------
// identity checks

// pointwise residual of the perfect-derivative combination
//   w' r~ u~^mu d_mu r + w r~ d_mu u~^mu + w u~^mu d_mu r~ - d_mu(w r~ u~^mu)
// with w = r^{1/(gamma-1)}; spatial derivatives discrete, time slots supplied
inline Field perfect_derivative_residual(const Grid& g, const BackgroundState& bg,
                                         const Field& rt, const std::array<Field, 4>& ut,
                                         const Field& dtr, const Field& dtrt,
                                         const std::array<Field, 4>& dtut) {
  const double e = 1.0 / (bg.gas.gamma - 1.0);
  auto powr = [&](double p) { return Field(bg.r.pow(p)); };
  Field res = Field::Zero(g.size());
  // mu = 0 contribution
  Field w = powr(e);
  res += e * powr(e - 1.0) * rt * ut[0] * dtr;
  res += w * rt * dtut[0];
  res += w * ut[0] * dtrt;
  res -= e * powr(e - 1.0) * dtr * rt * ut[0] + w * (dtrt * ut[0] + rt * dtut[0]);
  // spatial contributions
  for (int d = 0; d < g.dim(); ++d) {
    const Field dr = g.diff(bg.r, d, 1);
    res += e * powr(e - 1.0) * rt * ut[d + 1] * dr;
    res += w * rt * g.diff(ut[d + 1], d, 1);
    res += w * ut[d + 1] * g.diff(rt, d, 1);
    res -= g.diff(Field(w * rt * ut[d + 1]), d, 1);
  }
  return res;
}

// centered 4th-order time derivative of a sampled series at its midpoint
inline double series_midpoint_ddt(const std::vector<double>& I, double dt) {
  if (I.size() < 5 || I.size() % 2 == 0)
    throw SeriesTooShort("need an odd number of samples, at least 5");
  const size_t m = I.size() / 2;
  return (-I[m + 2] + 8 * I[m + 1] - 8 * I[m - 1] + I[m - 2]) / (12.0 * dt);
}

// moving-domain check: |d/dt int f - int (D_t f)/u^0 - int f d_i(u^i/u^0)|
// at the midpoint of an odd series of slices dt apart.  The domain (grid) may
// change per slice as long as its endpoints move with u^i/u^0; f and bg are
// sampled on whichever grid the slice uses, and the balance terms are
// evaluated on the midpoint grid.
inline double moving_domain_ddt_check(const std::function<Grid(double)>& grid_at,
                                      const std::function<Field(const Grid&, double)>& f_at,
                                      const std::function<BackgroundState(const Grid&, double)>& bg_at,
                                      double t0, double dt, int slices = 5) {
  if (slices < 5 || slices % 2 == 0)
    throw SeriesTooShort("need an odd number of samples, at least 5");
  std::vector<double> I;
  I.reserve(slices);
  for (int m = 0; m < slices; ++m) {
    const Grid gm = grid_at(t0 + m * dt);
    I.push_back(integrate(gm, f_at(gm, t0 + m * dt)));
  }
  const double lhs = series_midpoint_ddt(I, dt);

  const int c = slices / 2;
  const double tc = t0 + c * dt;
  const Grid g = grid_at(tc);
  const BackgroundState bg = bg_at(g, tc);
  const Field u0 = u0_field(bg);
  // d_t f at fixed x on the midpoint grid, 4th-order in dt
  const Field dtf = (-f_at(g, tc + 2 * dt) + 8.0 * f_at(g, tc + dt) - 8.0 * f_at(g, tc - dt) +
                     f_at(g, tc - 2 * dt)) /
                    (12.0 * dt);
  const Field f = f_at(g, tc);
  Field dens = dtf;  // (D_t f)/u^0 = d_t f + (u^i/u^0) d_i f
  Field divv = Field::Zero(g.size());
  for (int d = 0; d < g.dim(); ++d) {
    const Field v = bg.u[d] / u0;
    dens += v * g.diff(f, d, 1);
    divv += g.diff(v, d, 1);
  }
  const double rhs = integrate(g, Field(dens + f * divv));
  return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------------------
// second time derivatives by running the elimination on time-jet scalars
// (Dual<Dual<double>> seeded as a 2-jet), deepening the first pass

struct DeepDerivs {
  TimeDerivs bg1, lin1;  // first time derivatives
  TimeDerivs bg2, lin2;  // second time derivatives
};

inline DeepDerivs deep_time_derivatives(const Grid& g, const BackgroundState& bg,
                                        const LinearizedState& lin, const Forcing& F,
                                        const Forcing& dtF, const Forcing& Ft,
                                        const Forcing& dtFt) {
  using J = Dual<Dual<double>>;  // outer: linearization direction, inner: time
  DeepDerivs out;
  out.bg1 = nonlinear_time_derivatives(g, bg, F);
  out.lin1 = linearized_time_derivatives(g, bg, lin, F, Ft);

  const SpatialGrads sg = spatial_grads(g, bg.s, bg.r, bg.u);
  const SpatialGrads sgt = spatial_grads(g, lin.s, lin.r, lin.u);
  const SpatialGrads sg1 = spatial_grads(g, out.bg1.s, out.bg1.r, out.bg1.u);
  const SpatialGrads sgt1 = spatial_grads(g, out.lin1.s, out.lin1.r, out.lin1.u);

  auto jet = [](double v, double vt, double d, double dtd) {
    return J(Dual<double>(v, vt), Dual<double>(d, dtd));
  };

  auto sz = g.size();
  for (auto& td : {&out.bg2, &out.lin2}) {
    td->s.resize(sz);
    td->r.resize(sz);
    for (auto& c : td->u) c.resize(sz);
    td->u0.resize(sz);
    td->a1.resize(sz);
  }
  for (Eigen::Index p = 0; p < sz; ++p) {
    PointState<J> q;
    q.s = jet(bg.s[p], out.bg1.s[p], lin.s[p], out.lin1.s[p]);
    q.r = jet(bg.r[p], out.bg1.r[p], lin.r[p], out.lin1.r[p]);
    q.Fs = jet(F.Fs[p], dtF.Fs[p], Ft.Fs[p], dtFt.Fs[p]);
    q.Fr = jet(F.Fr[p], dtF.Fr[p], Ft.Fr[p], dtFt.Fr[p]);
    for (int j = 0; j < 3; ++j) {
      q.u[j] = jet(bg.u[j][p], out.bg1.u[j][p], lin.u[j][p], out.lin1.u[j][p]);
      q.ds[j] = jet(sg.ds[j][p], sg1.ds[j][p], sgt.ds[j][p], sgt1.ds[j][p]);
      q.dr[j] = jet(sg.dr[j][p], sg1.dr[j][p], sgt.dr[j][p], sgt1.dr[j][p]);
      q.Fu[j] = jet(F.Fu[j][p], dtF.Fu[j][p], Ft.Fu[j][p], dtFt.Fu[j][p]);
      for (int i = 0; i < 3; ++i)
        q.du[j][i] = jet(sg.du[j][i][p], sg1.du[j][i][p], sgt.du[j][i][p], sgt1.du[j][i][p]);
    }
    const auto d = eliminate_time_derivatives(q, bg.gas);
    out.bg2.s[p] = d.dts.v.d;
    out.bg2.r[p] = d.dtr.v.d;
    out.lin2.s[p] = d.dts.d.d;
    out.lin2.r[p] = d.dtr.d.d;
    for (int j = 0; j < 3; ++j) {
      out.bg2.u[j][p] = d.dtu[j].v.d;
      out.lin2.u[j][p] = d.dtu[j].d.d;
    }
    out.bg2.u0[p] = d.dtu0.v.d;
    out.lin2.u0[p] = d.dtu0.d.d;
    out.bg2.a1[p] = d.a1.v.v;
    out.lin2.a1[p] = d.a1.v.v;
  }
  return out;
}

// D_t^{2j} pairs (r~, u~) for the wave energy, j = 0..k (k <= 1 numerically)
inline std::vector<ConvectivePair> convective_pairs(const Grid& g, const BackgroundState& bg,
                                                    const LinearizedState& lin,
                                                    const DeepDerivs& dd, int k) {
  std::vector<ConvectivePair> out;
  ConvectivePair p0;
  p0.rt = lin.r;
  p0.ut4 = four_components(bg, lin.u);
  out.push_back(p0);
  if (k == 0) return out;
  if (k > 1) throw MissingConvectivePowers("numerical wave energies stop at k = 1");

  const Field u0 = u0_field(bg);
  // second-order jet per field: value, dt, dtt; D_t applied twice
  auto dt2 = [&](const Field& phi, const Field& phit, const Field& phitt) {
    Field Dt = u0 * phit;
    // dt(D_t phi) = dtu0 phit + u0 phitt + sum_i (dtu^i d_i phi + u^i d_i phit)
    Field dtD = dd.bg1.u0 * phit + u0 * phitt;
    for (int d = 0; d < g.dim(); ++d) {
      Dt += bg.u[d] * g.diff(phi, d, 1);
      dtD += dd.bg1.u[d] * g.diff(phi, d, 1) + bg.u[d] * g.diff(phit, d, 1);
    }
    return dt_apply(g, bg, Dt, dtD);
  };
  ConvectivePair p1;
  p1.rt = dt2(lin.r, dd.lin1.r, dd.lin2.r);
  const Field ut0 = lin_u0_field(bg, lin.u);
  p1.ut4 = {dt2(ut0, dd.lin1.u0, dd.lin2.u0), dt2(lin.u[0], dd.lin1.u[0], dd.lin2.u[0]),
            dt2(lin.u[1], dd.lin1.u[1], dd.lin2.u[1]),
            dt2(lin.u[2], dd.lin1.u[2], dd.lin2.u[2])};
  out.push_back(p1);
  return out;
}

}  // namespace vel
