#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vel/grid.hpp"

using namespace vel;
static constexpr double pi = std::numbers::pi;

static Field eval1(const Grid& g, double (*f)(double)) {
  Field out(g.size());
  for (int i = 0; i < g.axes[0].n; ++i) out[i] = f(g.x[0][i]);
  return out;
}

// int_0^1 x^sigma cos(x) dx by the alternating series, good to machine precision
static double cos_moment(double sigma) {
  double s = 0, fact = 1;
  for (int k = 0; k < 20; ++k) {
    if (k > 0) fact *= (2 * k - 1) * (2 * k);
    s += (k % 2 ? -1.0 : 1.0) / (fact * (2 * k + sigma + 1));
  }
  return s;
}

TEST_CASE("polynomial exactness") {
  Axis ax{33, 1.0, false, Grading::Start, 2.0};
  Grid g(ax);
  Field f = g.x[0].square();
  Field d = g.diff(f, 0, 1);
  CHECK((d - 2.0 * g.x[0]).abs().maxCoeff() < 1e-11);
  Field d2 = g.diff(f, 0, 2);
  CHECK((d2 - 2.0).abs().maxCoeff() < 1e-10);
  Field c = Field::Constant(g.size(), 3.7);
  CHECK(g.diff(c, 0, 1).abs().maxCoeff() < 1e-12);
  Field q = g.x[0].pow(4);
  CHECK((g.diff(q, 0, 3) - 24.0 * g.x[0]).abs().maxCoeff() < 1e-8);
}

TEST_CASE("periodic refinement ratio near 16") {
  const double L = 2.0;
  double errs[2];
  int lev = 0;
  for (int n : {64, 128}) {
    Grid g(Axis{n, L, true});
    Field f = (2 * pi / L * g.x[0]).sin();
    Field d = g.diff(f, 0, 1);
    Field ref = (2 * pi / L) * (2 * pi / L * g.x[0]).cos();
    errs[lev++] = (d - ref).abs().maxCoeff();
  }
  const double ratio = errs[0] / errs[1];
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("degenerate quadrature power moments") {
  Grid g(Axis{128, 1.0, false, Grading::Start, 2.0});
  Field r = g.x[0];
  Field one = Field::Ones(g.size());
  for (double sigma : {-0.4, 0.0, 0.5, 1.0}) {
    const double exact = 1.0 / (sigma + 1.0);
    const double got = integrate_weighted(g, r, sigma, one);
    CHECK(std::abs(got - exact) / exact < 1e-8);
  }
}

TEST_CASE("smooth factor against series reference") {
  Grid g(Axis{160, 1.0, false, Grading::Start, 2.0});
  Field r = g.x[0];
  Field F = g.x[0].cos();
  for (double sigma : {-0.4, 0.7}) {
    const double got = integrate_weighted(g, r, sigma, F);
    CHECK(std::abs(got - cos_moment(sigma)) < 1e-9);
  }
}

TEST_CASE("zero at the right end and at both ends") {
  {
    Grid g(Axis{128, 1.0, false, Grading::Uniform});
    Field r = 1.0 - g.x[0];
    const double got = integrate_weighted(g, r, -0.4, Field(Field::Ones(g.size())));
    CHECK(std::abs(got - 1.0 / 0.6) < 1e-7);
  }
  {
    Grid g(Axis{192, 1.0, false, Grading::Both});
    Field r = g.x[0] * (1.0 - g.x[0]);
    const double got = integrate_weighted(g, r, 0.5, Field(Field::Ones(g.size())));
    CHECK(std::abs(got - pi / 8.0) < 1e-9);
    const double got2 = integrate_weighted(g, r, -0.4, Field(Field::Ones(g.size())));
    const double beta = std::tgamma(0.6) * std::tgamma(0.6) / std::tgamma(1.2);
    CHECK(std::abs(got2 - beta) / beta < 1e-7);
  }
}

TEST_CASE("two dimensional slab") {
  const double L = 2.0;
  Grid g(Axis{48, L, true}, Axis{128, 1.0, false, Grading::Start, 2.0});
  Field r(g.size()), F(g.size()), fx(g.size());
  for (int i = 0; i < 48; ++i)
    for (int j = 0; j < 128; ++j) {
      const double x0 = g.x[0][i], x1 = g.x[1][j];
      r[g.idx(i, j)] = x1;
      F[g.idx(i, j)] = (2.0 + std::sin(2 * pi * x0 / L)) * std::cos(x1);
      fx[g.idx(i, j)] = std::sin(2 * pi * x0 / L) * x1 * x1;
    }
  // separable reference: int (2 + sin) dx0 = 2L
  const double got = integrate_weighted(g, r, -0.4, F);
  CHECK(std::abs(got - 2.0 * L * cos_moment(-0.4)) < 1e-8);

  Field d0 = g.diff(fx, 0, 1), d1 = g.diff(fx, 1, 1);
  double e0 = 0, e1 = 0;
  for (int i = 0; i < 48; ++i)
    for (int j = 0; j < 128; ++j) {
      const double x0 = g.x[0][i], x1 = g.x[1][j];
      e0 = std::max(e0, std::abs(d0[g.idx(i, j)] -
                                 (2 * pi / L) * std::cos(2 * pi * x0 / L) * x1 * x1));
      e1 = std::max(e1, std::abs(d1[g.idx(i, j)] - std::sin(2 * pi * x0 / L) * 2 * x1));
    }
  CHECK(e0 < 1e-4);
  CHECK(e1 < 1e-10);  // quadratic along the interval axis: exact
}

TEST_CASE("guards and summation") {
  CHECK_THROWS_AS(Grid(Axis{4, 1.0, false}), ResolutionTooLow);
  Eigen::ArrayXd v = Eigen::ArrayXd::LinSpaced(1000, 0.0, 1.0);
  CHECK(pairwise_sum(v) == doctest::Approx(500.0).epsilon(1e-14));
}
