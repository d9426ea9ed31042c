#pragma once

// Exhaustive verification of the order calculus over a finite range of
// term shapes and levels.  Shared between the unit tests, the acceptance
// suite, and the `order check` CLI subcommand.

#include <functional>
#include <string>

#include "vel/order.hpp"

namespace vel {

struct OrderCheckRow {
  Term term;
  int k = 0;
  std::string op;
  Order claimed_min{};
  Order computed_min{};
  bool pass = false;
};

// Visits every (m, l, var, k) in range and every certified operation, and
// reports one row per check.  Returns true when every row passes.
inline bool check_order_calculus(int max_m, int max_l, int max_k, int max_i,
                                 const std::function<void(const OrderCheckRow&)>& emit = {}) {
  bool all = true;
  auto row = [&](const Term& t, int k, const std::string& op, Order claimed, Order got) {
    const bool ok = claimed == got;
    all = all && ok;
    if (emit) emit(OrderCheckRow{t, k, op, claimed, got, ok});
    return ok;
  };
  auto row_ge = [&](const Term& t, int k, const std::string& op, Order bound, Order got) {
    const bool ok = got >= bound;
    all = all && ok;
    if (emit) emit(OrderCheckRow{t, k, op, bound, got, ok});
    return ok;
  };
  const VarKind vars[] = {VarKind::EntropyLin, VarKind::SoundLin, VarKind::VelocityLin};

  for (int k = 0; k <= max_k; ++k)
    for (int m = 0; m <= max_m; ++m)
      for (int l = 0; l <= max_l; ++l)
        for (VarKind v : vars) {
          const Term t{m, l, v};
          const Order o = order_of(t, k);

          // Part 1: r T has order O + 1.
          row(t, k, "mul_r", o + Order::whole(1), apply_op(OpKind::MulR, t, k).min_order(k));
          // Part 2: every member of \partial T has order exactly O - 1.
          {
            const TermSum ts = apply_op(OpKind::Partial, t, k);
            bool exact = true;
            for (const Term& u : ts.terms) exact = exact && (order_of(u, k) == o - Order::whole(1));
            all = all && exact;
            if (emit) emit({t, k, "partial_each", o - Order::whole(1), ts.min_order(k), exact});
          }
          // Part 3: D_t T has minimum order O - 1/2; the bound is attained
          // for r~ and u~ terms, while s~ terms bottom out at O.  D_t also
          // keeps at least one member of order >= O when l >= 1 or m >= 1.
          {
            const TermSum ts = apply_op(OpKind::Dt, t, k);
            const Order got = ts.min_order(k);
            if (v == VarKind::EntropyLin)
              row(t, k, "dt_min", o, got);
            else
              row(t, k, "dt_min", o - Order::halves(1), got);
            if (l >= 1 || m >= 1) {
              bool has_high = false;
              for (const Term& u : ts.terms) has_high = has_high || (order_of(u, k) >= o);
              all = all && has_high;
              if (emit) emit({t, k, "dt_keeps_order", o, got, has_high});
            }
          }
          // Part 4: order at level K equals order at k plus (K - k).
          for (int K = k; K <= max_k; ++K)
            row(t, k, "level_shift", o + Order::whole(K - k),
                order_of(level_shift(t, k, K).terms.front(), K));
        }

  // Sum-of-orders lemma: commutativity and the order-0 factor case.
  for (int k = 0; k <= max_k; ++k)
    for (int m = 0; m <= max_m; ++m)
      for (int l = 0; l <= max_l; ++l)
        for (VarKind v : vars)
          for (VarKind w : vars) {
            const Term a{m, l, v}, b{l, m, w};
            const auto ab = product_order(a, b, k), ba = product_order(b, a, k);
            const bool comm = (ab.has_value() == ba.has_value()) && (!ab || *ab == *ba);
            all = all && comm;
            if (emit) emit({a, k, "product_commutes", {}, {}, comm});
            if (order_of(b, k).doubled == 0 && ab) {
              all = all && row(a, k, "product_zero_factor", order_of(a, k), *ab);
            }
          }

  // D_t^i expansions: minimum order drops by i/2 ((i-1)/2 for s~ roots, whose
  // first convective derivative costs nothing extra), every member at or
  // above that minimum.
  for (int k = 0; k <= max_k; ++k)
    for (int i = 1; i <= max_i; ++i)
      for (VarKind v : vars) {
        const Term root{0, 0, v};
        const TermSum ts = dt_power_expand(v, i);
        const int drop = (v == VarKind::EntropyLin) ? i - 1 : i;
        row(root, k, "dt_power_min", order_of(root, k) - Order::halves(drop), ts.min_order(k));
        for (const Term& u : ts.terms)
          row_ge(root, k, "dt_power_member", ts.min_order(k), order_of(u, k));
      }

  return all;
}

}  // namespace vel
