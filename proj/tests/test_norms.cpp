#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vel/norms.hpp"
#include "vel/rng.hpp"

using namespace vel;
static constexpr double pi = std::numbers::pi;

static Grid unit_grid(int n = 128) { return Grid(Axis{n, 1.0, false, Grading::Start, 2.0}); }

static BackgroundState linear_r_background(const Grid& g, double gamma = 2.0) {
  GasParams gp;
  gp.gamma = gamma;
  BackgroundState bg = zero_background(g, gp);
  bg.r = g.x[0];
  return bg;
}

static Field random_smooth(const Grid& g, Rng& rng) {
  Field f = Field::Zero(g.size());
  for (int m = 0; m <= 3; ++m)
    f += rng.uniform(-1.0, 1.0) * g.x[0].pow(m) +
         rng.uniform(-1.0, 1.0) * (0.5 * (m + 1) * pi * g.x[0]).sin();
  return f;
}

TEST_CASE("weighted sobolev basics") {
  Grid g = unit_grid();
  Field r = g.x[0];
  Field one = Field::Ones(g.size());
  CHECK(weighted_sobolev_norm(g, r, one, NormSpec{0, 0.5}) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK(weighted_sobolev_norm(g, r, Field(Field::Zero(g.size())), NormSpec{2, 0.5}) == 0.0);
  CHECK_THROWS(weighted_sobolev_norm(g, r, one, NormSpec{0, -0.6}));
}

TEST_CASE("base energy example") {
  Grid g = unit_grid();
  BackgroundState bg = linear_r_background(g);  // gamma 2, s = 0, r = x
  LinearizedState lin = zero_linearized(g);
  lin.r = Field::Ones(g.size());
  CHECK(e0_energy(g, bg, lin) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(e0_energy(g, bg, zero_linearized(g)) == 0.0);
}

TEST_CASE("state norm homogeneity and zero") {
  Grid g = unit_grid(96);
  BackgroundState bg = linear_r_background(g, 1.8);
  Rng rng(5150);
  LinearizedState lin = zero_linearized(g);
  lin.s = random_smooth(g, rng);
  lin.r = random_smooth(g, rng);
  lin.u[0] = random_smooth(g, rng);
  const double base = h2k_norm(g, bg, lin, 1);
  CHECK(base > 0);
  for (int trial = 0; trial < 100; ++trial) {
    const double c = rng.uniform(-3.0, 3.0);
    LinearizedState sc = lin;
    sc.s *= c;
    sc.r *= c;
    for (auto& comp : sc.u) comp *= c;
    CHECK(h2k_norm(g, bg, sc, 1) == doctest::Approx(std::abs(c) * base).epsilon(1e-11));
  }
  CHECK(h2k_norm(g, bg, zero_linearized(g), 1) == 0.0);
}

TEST_CASE("embedding: extra half weight costs sup r") {
  Grid g = unit_grid();
  Rng rng(31337);
  Field r = 0.5 * g.x[0];  // sup r = 0.5
  const double rsup = r.maxCoeff();
  for (int trial = 0; trial < 50; ++trial) {
    Field f = random_smooth(g, rng);
    for (int k : {0, 1, 2}) {
      const double hi = weighted_sobolev_norm_sq(g, r, f, NormSpec{k, 0.8});
      const double lo = weighted_sobolev_norm_sq(g, r, f, NormSpec{k, 0.3});
      CHECK(hi <= rsup * lo * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("trading derivatives for weight: fitted constant stable") {
  Rng rng(97);
  double fitted[2];
  int lev = 0;
  for (int n : {96, 192}) {
    Grid g = unit_grid(n);
    Field r = 0.4 * g.x[0];
    Rng local(404);
    double worst = 0;
    for (int trial = 0; trial < 30; ++trial) {
      Field f = random_smooth(g, local);
      const double lhs = weighted_sobolev_norm(g, r, f, NormSpec{1, 0.6});
      const double rhs = r.maxCoeff() * weighted_sobolev_norm(g, r, f, NormSpec{2, 0.6});
      worst = std::max(worst, lhs / rhs);
    }
    fitted[lev++] = worst;
  }
  CHECK(fitted[0] == doctest::Approx(fitted[1]).epsilon(0.05));
  (void)rng;
}

TEST_CASE("pair norm equivalent to the k=0 state pieces") {
  Grid g = unit_grid();
  BackgroundState bg = linear_r_background(g, 2.2);
  bg.r *= 0.3;
  bg.u[0] = 0.2 * g.x[0].square();  // mild background motion
  Rng rng(777);
  const double s0 = sigma0(bg.gas);
  double lo = 1e300, hi = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Field rt = random_smooth(g, rng);
    std::array<Field, 3> ut = {random_smooth(g, rng), random_smooth(g, rng),
                               random_smooth(g, rng)};
    const std::vector<Field> ut4 = four_components(bg, ut);
    const double th = th_norm_sq(g, bg, rt, ut4);
    const double flat = hom_weighted_sq(g, bg.r, s0, 0, rt) +
                        hom_weighted_sq_vec(g, bg.r, s0 + 0.5, 0, ut4, g_density(bg));
    const double ratio = th / flat;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(lo > 0);
  CHECK(hi / lo < 50.0);
}

TEST_CASE("wave energy guard") {
  Grid g = unit_grid(64);
  BackgroundState bg = linear_r_background(g);
  CHECK_THROWS_AS(wave_energy_sq(g, bg, {}, 1), MissingConvectivePowers);
}
