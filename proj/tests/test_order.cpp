#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vel/order.hpp"
#include "vel/order_checks.hpp"

using namespace vel;

TEST_CASE("order formula") {
  CHECK(order_of({0, 0, VarKind::SoundLin}, 0) == Order::whole(0));
  // m = k, l = 2k velocity terms sit at -1/2 for every k
  for (int k = 0; k <= 4; ++k)
    CHECK(order_of({k, 2 * k, VarKind::VelocityLin}, k) == Order::halves(-1));
  CHECK(order_of({1, 2, VarKind::VelocityLin}, 1) == Order::halves(-1));
  CHECK(order_of({1, 2, VarKind::EntropyLin}, 1) == Order::halves(-1));
  CHECK(order_of({0, 1, VarKind::SoundLin}, 1) == Order::whole(0));
}

TEST_CASE("classification by sign") {
  for (int k = 0; k <= 4; ++k) {
    CHECK(classify({k + 1, 2 * k, VarKind::SoundLin}, k) == Criticality::Subcritical);
    CHECK(classify({k, 2 * k, VarKind::SoundLin}, k) == Criticality::Critical);
    CHECK(classify({k, 2 * k, VarKind::VelocityLin}, k) == Criticality::Supercritical);
  }
}

TEST_CASE("product order sums and estimability") {
  // orders (0, +1/2) -> +1/2
  Term a{1, 1, VarKind::SoundLin};       // order 1 at k=0? use k=1: 1-1+1 = 1
  Term crit{1, 2, VarKind::SoundLin};    // order 0 at k=1
  Term sup{1, 2, VarKind::VelocityLin};  // order -1/2 at k=1
  Term half{1, 1, VarKind::VelocityLin}; // order +1/2 at k=0? 1-1+0-1/2 = -1/2; at k=1: +1/2
  auto p1 = product_order(crit, half, 1);
  REQUIRE(p1.has_value());
  CHECK(*p1 == Order::halves(1));
  auto p2 = product_order(sup, half, 1);
  REQUIRE(p2.has_value());
  CHECK(*p2 == Order::whole(0));
  CHECK_FALSE(product_order(sup, crit, 1).has_value());
  (void)a;
}

TEST_CASE("operation rewrites") {
  // D_t r~ at k=1: members r du~, u~, min order 1/2 = O - 1/2 with O = 1
  TermSum dt = apply_op(OpKind::Dt, {0, 0, VarKind::SoundLin}, 1);
  CHECK(dt.terms.size() == 2);
  CHECK(dt.min_order(1) == Order::halves(1));
  CHECK(order_of({0, 0, VarKind::SoundLin}, 1) - Order::halves(1) == Order::halves(1));

  // MulR on (m=0,l=2,u~): order -1/2 at level 2 becomes +1/2
  TermSum mr = apply_op(OpKind::MulR, {0, 2, VarKind::VelocityLin}, 2);
  REQUIRE(mr.terms.size() == 1);
  CHECK(order_of({0, 2, VarKind::VelocityLin}, 2) == Order::halves(-1));
  CHECK(order_of(mr.terms[0], 2) == Order::halves(1));

  // Level shift K=2 of a k=1 order -1/2 term: same term, +1/2 at K=2
  Term t{1, 2, VarKind::VelocityLin};
  CHECK(order_of(t, 1) == Order::halves(-1));
  TermSum ls = level_shift(t, 1, 2);
  CHECK(order_of(ls.terms[0], 2) == Order::halves(1));
  CHECK_THROWS_AS(level_shift(t, 2, 1), LevelShiftBelowCurrent);
}

TEST_CASE("convective power expansion") {
  TermSum s1 = dt_power_expand(VarKind::EntropyLin, 1);
  REQUIRE(s1.terms.size() == 1);
  CHECK(s1.terms[0] == Term{0, 0, VarKind::VelocityLin});

  TermSum r2 = dt_power_expand(VarKind::SoundLin, 2);
  REQUIRE(r2.terms.size() == 2);
  CHECK(r2.terms[0] == Term{0, 1, VarKind::SoundLin});
  CHECK(r2.terms[1] == Term{1, 2, VarKind::SoundLin});

  TermSum u2 = dt_power_expand(VarKind::VelocityLin, 2);
  REQUIRE(u2.terms.size() == 3);
  CHECK(u2.terms[0] == Term{0, 1, VarKind::VelocityLin});
  CHECK(u2.terms[1] == Term{1, 2, VarKind::VelocityLin});
  CHECK(u2.terms[2] == Term{0, 1, VarKind::SoundLin});

  CHECK_THROWS_AS(dt_power_expand(VarKind::SoundLin, 0), NonPositivePower);
}

TEST_CASE("commutator schematics") {
  auto c1 = commutator_expand(CommutatorKind::PartialDtN, 1);
  REQUIRE(c1.size() == 1);
  CHECK(c1[0].dt_power == 0);
  CHECK(c1[0].partial_power == 1);
  CHECK(c1[0].coeff_derivs == 1);
  CHECK(c1[0].sign == 1);

  auto d1 = commutator_expand(CommutatorKind::DtPartialN, 1);
  REQUIRE(d1.size() == 1);
  CHECK(d1[0].sign == -1);

  auto d2 = commutator_expand(CommutatorKind::DtPartialN, 2);
  REQUIRE(d2.size() == 2);
  CHECK(d2[0].partial_power == 2);
  CHECK(d2[0].multiplicity == 2);
  CHECK(d2[0].coeff_derivs == 1);
  CHECK(d2[1].partial_power == 1);
  CHECK(d2[1].coeff_derivs == 2);

  auto cN = commutator_expand(CommutatorKind::PartialDtN, 4);
  REQUIRE(cN.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(cN[i].dt_power == i);
    CHECK(cN[i].partial_power == 1);
  }
}

TEST_CASE("exhaustive range") {
  CHECK(check_order_calculus(6, 6, 4, 8));
}
