#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vel/elliptic.hpp"
#include "vel/order.hpp"
#include "vel/rng.hpp"

using namespace vel;
static constexpr double pi = std::numbers::pi;

static Field smooth1(const Grid& g, Rng& rng, double amp) {
  Field f = Field::Zero(g.size());
  for (int m = 1; m <= 2; ++m)
    f += rng.uniform(-amp, amp) * (2 * pi * m * g.x[0] / g.axes[0].length +
                                   rng.uniform(0, 2 * pi))
                                      .sin();
  return f;
}

static Field smooth2(const Grid& g, Rng& rng, double amp) {
  Field f = Field::Zero(g.size());
  for (int m = 1; m <= 2; ++m) {
    const double a = rng.uniform(-amp, amp), p0 = rng.uniform(0, 2 * pi),
                 p1 = rng.uniform(0, 2 * pi);
    for (int i = 0; i < g.axes[0].n; ++i)
      for (int j = 0; j < g.axes[1].n; ++j)
        f[g.idx(i, j)] += a * std::sin(2 * pi * m * g.x[0][i] + p0) *
                          std::cos(2 * pi * m * g.x[1][j] + p1);
  }
  return f;
}

TEST_CASE("good elliptic operator hand examples") {
  GasParams gp;  // gamma 2, s = 0, Gamma = 1/2
  Grid g(Axis{64, 1.0, false});
  BackgroundState bg = zero_background(g, gp);
  bg.r = g.x[0];
  const Field denom = 0.5 + g.x[0];
  CHECK((apply_l1_good(g, bg, bg.r) - 1.0 / denom).abs().maxCoeff() < 1e-11);
  const Field x2 = g.x[0].square();
  CHECK((apply_l1_good(g, bg, x2) - 4.0 * g.x[0] / denom).abs().maxCoeff() < 1e-10);
  // absorbed-term variant adds b gradient copies
  CHECK((apply_l1_good(g, bg, bg.r, 2.0) - 3.0 / denom).abs().maxCoeff() < 1e-10);
}

TEST_CASE("L3 annihilates gradients in the rest frame") {
  GasParams gp;
  Grid g(Axis{24, 1.0, false}, Axis{24, 1.0, false});
  BackgroundState bg = zero_background(g, gp);
  Field phi = Field::Zero(g.size());
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j) {
      const double x = g.x[0][i], y = g.x[1][j];
      // affine weight: all stencils exact on polynomials
      bg.r[g.idx(i, j)] = 0.2 + 0.1 * x;
      phi[g.idx(i, j)] = x * x * x + x * x * y + y * y * y;
    }
  std::array<Field, 3> ut = {g.diff(phi, 0, 1), g.diff(phi, 1, 1), Field::Zero(g.size())};
  const auto l3 = apply_l3_good(g, bg, ut);
  for (const auto& c : l3) CHECK(c.abs().maxCoeff() < 1e-9);
}

TEST_CASE("operator guards") {
  GasParams gp;
  Grid g1(Axis{16, 1.0, true});
  BackgroundState bg = zero_background(g1, gp, 0.2);
  std::array<Field, 3> ut = {Field::Zero(g1.size()), Field::Zero(g1.size()),
                             Field::Zero(g1.size())};
  CHECK_THROWS_AS(apply_l3_good(g1, bg, ut), GridDimTooLow);
  CHECK_THROWS_AS(apply_elliptic(EllipticOpId::L1_good, g1, bg, EllipticField{ut}),
                  WrongFieldKind);
  CHECK_THROWS_AS(
      apply_elliptic(EllipticOpId::L2_good, g1, bg, EllipticField{Field(Field::Zero(g1.size()))}),
      WrongFieldKind);
  CHECK_THROWS_AS(higher_sources(g1, bg, zero_linearized(g1), 2), UnsupportedK);
  CHECK_THROWS_AS(higher_sources(g1, bg, zero_linearized(g1), 1), MissingTimeDerivative);
  std::vector<int> family(10, 1);
  CHECK_THROWS_AS(estimate_constant_fit(
                      family, [](int) { return 1.0; }, [](int) { return 1.0; }),
                  FamilyTooSmall);
}

TEST_CASE("div-curl pairing: grouped contraction equals the direct expansion") {
  GasParams gp;
  gp.gamma = 2.1;
  Grid g(Axis{16, 1.0, true}, Axis{16, 1.0, true});
  Rng rng(808);
  BackgroundState bg = zero_background(g, gp, 0.2);
  bg.r = 0.2 + smooth2(g, rng, 0.05);
  bg.s = smooth2(g, rng, 0.2);
  bg.u[0] = 0.3 + smooth2(g, rng, 0.2);
  bg.u[1] = smooth2(g, rng, 0.2);
  bg.u[2] = smooth2(g, rng, 0.2);
  for (int trial = 0; trial < 5; ++trial) {
    std::array<Field, 3> ut = {smooth2(g, rng, 1.0), smooth2(g, rng, 1.0),
                               smooth2(g, rng, 1.0)};
    const Field a = divcurl_pair_grouped(g, bg, ut);
    const Field b = divcurl_pair_expanded(g, bg, ut);
    const double scale = std::max(1.0, a.abs().maxCoeff());
    CHECK((a - b).abs().maxCoeff() < 1e-10 * scale);
  }
}

TEST_CASE("decomposition residual vanishes on constant rest states") {
  GasParams gp;
  Grid g(Axis{20, 1.0, true}, Axis{20, 1.0, true});
  Rng rng(99);
  BackgroundState bg = zero_background(g, gp, 0.2);
  const auto d = nonlinear_time_derivatives(g, bg, zero_forcing(g));
  const Field rt = smooth2(g, rng, 1.0), dtrt = smooth2(g, rng, 1.0),
              dt2rt = smooth2(g, rng, 1.0);
  CHECK(decomposition_residual(g, bg, d, rt, dtrt, dt2rt).abs().maxCoeff() < 1e-13);
}

TEST_CASE("decomposition residual is pure discretization error") {
  GasParams gp;
  gp.gamma = 1.8;
  double errs[2];
  int lev = 0;
  for (int n : {24, 48}) {
    Grid g(Axis{n, 1.0, true}, Axis{n, 1.0, true});
    Rng rng(4242);
    BackgroundState bg = zero_background(g, gp, 0.25);
    bg.s = smooth2(g, rng, 0.2);
    bg.r = 0.25 + smooth2(g, rng, 0.05);
    bg.u[0] = smooth2(g, rng, 0.3);
    bg.u[1] = smooth2(g, rng, 0.3);
    const auto d = nonlinear_time_derivatives(g, bg, zero_forcing(g));
    const Field rt = smooth2(g, rng, 1.0), dtrt = smooth2(g, rng, 1.0),
                dt2rt = smooth2(g, rng, 1.0);
    errs[lev++] = decomposition_residual(g, bg, d, rt, dtrt, dt2rt).abs().maxCoeff();
  }
  CHECK(errs[0] / errs[1] > 10.0);
}

TEST_CASE("k = 0 sources are the plain linearized sources") {
  GasParams gp;
  Grid g(Axis{32, 1.0, true});
  Rng rng(13);
  BackgroundState bg = zero_background(g, gp, 0.2);
  bg.r = 0.2 + smooth1(g, rng, 0.05);
  bg.u[0] = smooth1(g, rng, 0.2);
  LinearizedState lin = zero_linearized(g);
  lin.s = smooth1(g, rng, 1.0);
  lin.r = smooth1(g, rng, 1.0);
  for (auto& c : lin.u) c = smooth1(g, rng, 1.0);
  const auto hs = higher_sources(g, bg, lin, 0);
  const auto src = linearized_sources(g, bg, lin, zero_forcing(g));
  CHECK((hs.B2k - src.g).abs().maxCoeff() == 0.0);
  for (int a = 0; a < 4; ++a) CHECK((hs.C2k[a] - src.h[a]).abs().maxCoeff() == 0.0);
}

TEST_CASE("k = 1 sources vanish on a constant background") {
  GasParams gp;
  Grid g(Axis{24, 1.0, true});
  Rng rng(7);
  SliceSeries s;
  s.grid = &g;
  s.dt = 1e-3;
  for (int m = 0; m < 9; ++m) {
    BackgroundState bg = zero_background(g, gp, 0.2);
    bg.t = m * s.dt;
    LinearizedState lin = zero_linearized(g);
    Rng local(7);
    lin.r = (1.0 + 0.1 * m) * smooth1(g, local, 1.0);
    lin.s = (1.0 - 0.05 * m) * smooth1(g, local, 1.0);
    for (auto& c : lin.u) c = (1.0 + 0.02 * m) * smooth1(g, local, 1.0);
    s.bg.push_back(bg);
    s.lin.push_back(lin);
  }
  const auto hs = higher_sources_k1(s);
  CHECK(hs.B2k.abs().maxCoeff() < 1e-12);
  for (const auto& c : hs.C2k) CHECK(c.abs().maxCoeff() < 1e-12);
  (void)rng;
}

// evolve a coupled background + linearized solution and sample consecutive
// slices dt apart
static SliceSeries evolve_series(const Grid& g, const BackgroundState& bg0,
                                 const LinearizedState& lin0, double dt, int slices) {
  SliceSeries s;
  s.grid = &g;
  s.dt = dt;
  BackgroundState bg = bg0;
  LinearizedState lin = lin0;
  auto zf = [&](double) { return zero_forcing(g); };
  for (int m = 0; m < slices; ++m) {
    s.bg.push_back(bg);
    s.lin.push_back(lin);
    auto bgf = [&g, base = bg, &zf](double t) {
      BackgroundState b = base;
      const int nsub = 4;
      const double h = (t - base.t) / nsub;
      if (std::abs(h) < 1e-300) return b;
      for (int q = 0; q < nsub; ++q) b = step_rk4(g, b, zf, h);
      return b;
    };
    lin = step_rk4_linearized(g, bgf, zf, zf, lin, dt);
    bg = bgf(bg.t + dt);
  }
  return s;
}

TEST_CASE("k = 1 commuted system residual converges at fourth order") {
  GasParams gp;
  gp.gamma = 2.0;
  double errs[2];
  int lev = 0;
  for (int n : {48, 96}) {
    Grid g(Axis{n, 1.0, true});
    Rng rng(31);
    BackgroundState bg = zero_background(g, gp, 0.15);
    bg.r = 0.15 + 0.04 * (2 * pi * g.x[0]).sin();
    bg.u[0] = 0.1 * (2 * pi * g.x[0]).cos();
    LinearizedState lin = zero_linearized(g);
    lin.r = smooth1(g, rng, 0.5);
    lin.s = smooth1(g, rng, 0.5);
    lin.u[0] = smooth1(g, rng, 0.5);
    lin.u[1] = smooth1(g, rng, 0.5);
    const double h = 1.0 / n;
    const SliceSeries s = evolve_series(g, bg, lin, 0.2 * h * h, 9);
    const auto res = k1_system_residual(s);
    double e = res.r_eq.abs().maxCoeff();
    for (const auto& c : res.u_eq) e = std::max(e, c.abs().maxCoeff());
    errs[lev++] = e;
  }
  CHECK(errs[0] / errs[1] > 8.0);
  CHECK(errs[0] / errs[1] < 40.0);
}

TEST_CASE("estimate fit is finite and stable for the polynomial family") {
  GasParams gp;  // gamma 2: sigma_0 weights are plain
  double fitted[2];
  int lev = 0;
  for (int n : {96, 192}) {
    Grid g(Axis{n, 1.0, false, Grading::Start, 2.0});
    BackgroundState bg = zero_background(g, gp);
    bg.r = g.x[0];
    std::vector<Field> family;
    Rng rng(2024);
    while (family.size() < 50) {
      Field f = Field::Zero(g.size());
      for (int p = 1; p <= 6; ++p) f += rng.uniform(-1, 1) * g.x[0].pow(p);
      family.push_back(f);
    }
    const double half = 1.0 / (2.0 * (gp.gamma - 1.0));
    const double c = estimate_constant_fit(
        family,
        [&](const Field& rt) {
          return weighted_sobolev_norm_sq(g, bg.r, rt, NormSpec{2, half + 0.5});
        },
        [&](const Field& rt) {
          const Field l1 = apply_l1_good(g, bg, rt);
          return weighted_sobolev_norm_sq(g, bg.r, l1, NormSpec{0, half - 0.5}) +
                 weighted_sobolev_norm_sq(g, bg.r, rt,
                                          NormSpec{0, (2.0 - gp.gamma) / (2.0 * (gp.gamma - 1.0))});
        });
    CHECK(std::isfinite(c));
    CHECK(c > 0);
    fitted[lev++] = c;
  }
  CHECK(std::abs(fitted[0] - fitted[1]) / fitted[0] < 0.1);
}

TEST_CASE("black terms are subcritical under the symbolic book-keeping") {
  // shapes of the decomposition remainder at k = 1, using the background
  // equation D_t r = -(gamma-1) r (div u) to expose the r factor in D_t r
  const int k = 1;
  std::vector<TermSum> groups;
  {
    TermSum t;  // D_t r u d r~ ~ r d r~
    t.add(1, 1, VarKind::SoundLin);
    groups.push_back(t);
  }
  {
    TermSum t;  // r D_t^2 r~
    for (const Term& m : dt_power_expand(VarKind::SoundLin, 2).terms)
      t.add(m.m + 1, m.l, m.var);
    groups.push_back(t);
  }
  {
    TermSum t;  // r d(D_t r~) and r D_t r~ and r d r~ members of the D_t^2 group
    for (const Term& m : dt_power_expand(VarKind::SoundLin, 1).terms) {
      for (const Term& p : apply_op(OpKind::Partial, m, k).terms)
        t.add(p.m + 1, p.l, p.var);
      t.add(m.m + 1, m.l, m.var);
    }
    t.add(1, 1, VarKind::SoundLin);
    groups.push_back(t);
  }
  {
    TermSum t;  // d_t r D_t r~ and d r D_t r~ (coefficient times D_t r~)
    for (const Term& m : dt_power_expand(VarKind::SoundLin, 1).terms) t.add(m.m, m.l, m.var);
    groups.push_back(t);
  }
  for (const TermSum& t : groups) CHECK(t.min_order(k) >= Order::halves(1));
}

TEST_CASE("principal parts and remainders certify at the stated orders") {
  const int k = 1;
  // D_t^2 r~ matches the principal part of L~_1 r~ (critical, order 0) up to
  // a remainder of order >= 1/2
  CHECK(l1_good_principal_schematic().min_order(k) == Order::halves(0));
  CHECK(dt2_rtilde_remainder_schematic().min_order(k) >= Order::halves(1));
  // D_t^2 u~ matches the principal part of L~_2 u~ (critical for velocity
  // terms, order -1/2) up to a remainder of order >= 0
  CHECK(l2_good_principal_schematic().min_order(k) == Order::halves(-1));
  CHECK(dt2_utilde_remainder_schematic().min_order(k) >= Order::halves(0));
  // weighted-derivative ledger: explicit members of [L^{m,2m}, L~_1] sit at
  // the critical class of L^{m,2m} L~_1 r~, which is order -1 at k = m
  for (int m = 1; m <= 3; ++m) {
    const TermSum c = commutator_Lm_L1_explicit(m);
    CHECK(c.min_order(m) >= Order::halves(-2));
  }
  CHECK_THROWS_AS(commutator_Lm_L1_explicit(0), NonPositivePower);
}
