#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "vel/geometry.hpp"
#include "vel/rng.hpp"

using namespace vel;
using V3 = Vec3<double>;
using V4 = Vec4<double>;

static Eigen::Matrix4d minkowski_matrix() {
  Eigen::Matrix4d g = Eigen::Matrix4d::Identity();
  g(0, 0) = -1.0;
  return g;
}

TEST_CASE("velocity completion") {
  CHECK(complete_velocity<double>(V3(0, 0, 0))[0] == doctest::Approx(1.0));
  CHECK(complete_velocity<double>(V3(0.6, 0.8, 0))[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(complete_velocity<double>(V3(1, 0, 0))[0] == doctest::Approx(std::sqrt(2.0)));
  V4 u = complete_velocity<double>(V3(0.3, -1.2, 2.5));
  CHECK(std::abs(dot_minkowski(u, u) + 1.0) < 1e-14);
  CHECK(u[0] >= 1.0);
}

TEST_CASE("rest frame tensors") {
  auto P = tensor_pack(complete_velocity<double>(V3(0, 0, 0)));
  Eigen::Matrix4d pi_expect = Eigen::Matrix4d::Identity();
  pi_expect(0, 0) = 0.0;
  CHECK((P.Pi - pi_expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((P.G - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((P.H - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("boost (1,0,0) closed forms") {
  auto P = tensor_pack(complete_velocity<double>(V3(1, 0, 0)));
  CHECK(P.H(0, 0) == doctest::Approx(0.5));
  V4 u = complete_velocity<double>(V3(1, 0, 0));
  CHECK(lin_velocity_zero(u, V3(1, 0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(lin_velocity_zero(u, V3(0, 0, 0)) == doctest::Approx(0.0));
}

TEST_CASE("identity fuzz sweep") {
  Rng rng(20240817);
  const Eigen::Matrix4d g = minkowski_matrix();
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    V3 us;
    for (int i = 0; i < 3; ++i) us[i] = rng.uniform(-3.0, 3.0);
    const V4 u = complete_velocity<double>(us);
    const auto P = tensor_pack(u);
    const V4 ul = lower_index(u);

    // G B B = H
    Eigen::Matrix3d gbb = P.B.transpose() * P.G * P.B;
    worst = std::max(worst, (gbb - P.H).cwiseAbs().maxCoeff());
    // Pi u = 0 (contract the lowered velocity)
    worst = std::max(worst, (P.Pi * ul).cwiseAbs().maxCoeff());
    // projection idempotence Pi g Pi = Pi
    worst = std::max(worst, (P.Pi * g * P.Pi - P.Pi).cwiseAbs().maxCoeff());

    // orthogonal completion and Pi acting as identity on u-orthogonal vectors
    V3 ts;
    for (int i = 0; i < 3; ++i) ts[i] = rng.uniform(-2.0, 2.0);
    V4 X;
    X << lin_velocity_zero(u, ts), ts[0], ts[1], ts[2];
    worst = std::max(worst, std::abs(dot_minkowski(X, u)));
    worst = std::max(worst, (P.Pi * lower_index(X) - X).cwiseAbs().maxCoeff());

    // G positive definite, and the euclidean/G comparability constant from
    // its smallest eigenvalue is finite
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(P.G);
    const double lmin = es.eigenvalues().minCoeff();
    CHECK(lmin > 0.0);
    const double gn = g_norm_sq(P.G, X);
    CHECK(X.squaredNorm() <= (1.0 / lmin) * gn * (1.0 + 1e-12));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("constraint guard") {
  V4 bad;
  bad << 1.0, 0.5, 0.0, 0.0;  // not normalized
  CHECK_THROWS_AS(tensor_pack(bad), ConstraintViolated);
}
