#pragma once

// Meshes on 1-D intervals and 2-D slabs (periodic x interval), centered
// 4th-order differentiation with one-sided closures, and quadrature that stays
// accurate for integrands r^sigma * (smooth) with sigma > -1 when r vanishes
// simply at an interval end.  Cells near such a zero are moment-fitted: the
// integrand is split as (x - z)^sigma * psi^sigma * F with psi = r/(x - z)
// smooth, the singular moments are integrated exactly, and only the smooth
// part is interpolated.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vel {

using Field = Eigen::ArrayXd;

struct ResolutionTooLow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Grading { Uniform, Start, Both };

struct Axis {
  int n = 0;           // node count (periodic: nodes 0..n-1, node n identified with 0)
  double length = 1.0;
  bool periodic = false;
  Grading grading = Grading::Uniform;
  double exponent = 2.0;  // clustering exponent for Grading::Start

  Eigen::ArrayXd nodes() const {
    if (n < 8) throw ResolutionTooLow("axis needs at least 8 nodes");
    Eigen::ArrayXd x(n);
    if (periodic) {
      for (int i = 0; i < n; ++i) x[i] = length * double(i) / n;
      return x;
    }
    for (int i = 0; i < n; ++i) {
      const double xi = double(i) / (n - 1);
      double m = xi;
      if (grading == Grading::Start) m = std::pow(xi, exponent);
      if (grading == Grading::Both) m = xi * xi * (3.0 - 2.0 * xi);
      x[i] = length * m;
    }
    x[0] = 0.0;
    x[n - 1] = length;
    return x;
  }
};

// Fornberg's recursion: weights of the m-th derivative at z from the given
// nodes; exact on polynomials of degree < node count.
inline Eigen::VectorXd fd_weights(double z, const Eigen::ArrayXd& xs, int m) {
  const int nd = int(xs.size());
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nd, m + 1);
  double c1 = 1.0, c4 = xs[0] - z;
  C(0, 0) = 1.0;
  for (int i = 1; i < nd; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = xs[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
        C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
      C(j, 0) = c4 * C(j, 0) / c3;
    }
    c1 = c2;
  }
  return C.col(m);
}

// deterministic fixed-tree pairwise reduction
inline double pairwise_sum(const double* a, Eigen::Index n) {
  if (n <= 8) {
    double s = 0;
    for (Eigen::Index i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const Eigen::Index half = n / 2;
  return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}
inline double pairwise_sum(const Eigen::ArrayXd& a) { return pairwise_sum(a.data(), a.size()); }

namespace detail {

inline int stencil_width(int m) {
  int w = m + 4;
  return w % 2 ? w : w + 1;
}

// differentiate one line of values; stride-aware so 2-D fields reuse it
inline void diff_line(const Eigen::ArrayXd& xs, bool periodic, int m, const double* in,
                      Eigen::Index stride, double* out, Eigen::Index ostride) {
  const int n = int(xs.size());
  const int w = stencil_width(m);
  if (n < w) throw ResolutionTooLow("axis too short for requested derivative");
  if (periodic) {
    const double h = xs[1] - xs[0];
    Eigen::ArrayXd off(w);
    for (int k = 0; k < w; ++k) off[k] = (k - w / 2) * h;
    const Eigen::VectorXd c = fd_weights(0.0, off, m);
    for (int i = 0; i < n; ++i) {
      double acc = 0;
      for (int k = 0; k < w; ++k) {
        const int j = ((i + k - w / 2) % n + n) % n;
        acc += c[k] * in[j * stride];
      }
      out[i * ostride] = acc;
    }
    return;
  }
  for (int i = 0; i < n; ++i) {
    int lo = std::clamp(i - w / 2, 0, n - w);
    const Eigen::VectorXd c = fd_weights(xs[i], xs.segment(lo, w), m);
    double acc = 0;
    for (int k = 0; k < w; ++k) acc += c[k] * in[(lo + k) * stride];
    out[i * ostride] = acc;
  }
}

}  // namespace detail

struct Grid {
  std::vector<Axis> axes;
  std::vector<Eigen::ArrayXd> x;  // node coordinates per axis

  explicit Grid(const Axis& a) : axes{a} { x.push_back(a.nodes()); }
  Grid(const Axis& a, const Axis& b) : axes{a, b} {
    x.push_back(a.nodes());
    x.push_back(b.nodes());
  }

  int dim() const { return int(axes.size()); }
  Eigen::Index size() const {
    Eigen::Index s = 1;
    for (const auto& ax : axes) s *= ax.n;
    return s;
  }
  // flattened layout: axis 0 slow, axis 1 fast
  Eigen::Index idx(int i0, int i1 = 0) const {
    return dim() == 1 ? i0 : Eigen::Index(i0) * axes[1].n + i1;
  }

  Field diff(const Field& f, int axis, int m) const {
    if (f.size() != size()) throw std::invalid_argument("field/grid size mismatch");
    if (m < 0 || m > 4) throw std::invalid_argument("derivative order must be 0..4");
    if (m == 0) return f;
    Field out(f.size());
    if (dim() == 1) {
      detail::diff_line(x[0], axes[0].periodic, m, f.data(), 1, out.data(), 1);
      return out;
    }
    const int n0 = axes[0].n, n1 = axes[1].n;
    if (axis == 0) {
      for (int j = 0; j < n1; ++j)
        detail::diff_line(x[0], axes[0].periodic, m, f.data() + j, n1, out.data() + j, n1);
    } else {
      for (int i = 0; i < n0; ++i)
        detail::diff_line(x[1], axes[1].periodic, m, f.data() + Eigen::Index(i) * n1, 1,
                          out.data() + Eigen::Index(i) * n1, 1);
    }
    return out;
  }
};

namespace detail {

// interpolatory weights for one cell: solve sum_k c_k p_j(x_k) = int_cell w p_j
// with p_j scaled monomials, w either 1 or the singular factor |x - z|^sigma
struct CellRule {
  int lo = 0;                // first stencil node
  Eigen::VectorXd c;         // weights on stencil nodes
};

inline CellRule plain_cell(const Eigen::ArrayXd& xs, int cell, int w = 5) {
  const int n = int(xs.size());
  const int lo = std::clamp(cell - w / 2 + 1, 0, n - w);
  const double a = xs[cell], b = xs[cell + 1];
  const double ctr = 0.5 * (a + b);
  const double S = std::max(xs[lo + w - 1] - ctr, ctr - xs[lo]);
  Eigen::MatrixXd V(w, w);
  Eigen::VectorXd M(w);
  for (int j = 0; j < w; ++j) {
    for (int k = 0; k < w; ++k) V(j, k) = std::pow((xs[lo + k] - ctr) / S, j);
    M[j] = S / (j + 1) * (std::pow((b - ctr) / S, j + 1) - std::pow((a - ctr) / S, j + 1));
  }
  CellRule r;
  r.lo = lo;
  r.c = V.fullPivLu().solve(M);
  return r;
}

// moments of |x - z|^sigma about the zero z placed at an interval end;
// d(x) = |x - z| is increasing on the stencil when ordered away from z
inline CellRule singular_cell(const Eigen::ArrayXd& d, int cell, double sigma, int w = 5) {
  const int n = int(d.size());
  const int lo = std::clamp(cell - w / 2 + 1, 0, n - w);
  const double a = d[cell], b = d[cell + 1];
  const double S = d[lo + w - 1];
  Eigen::MatrixXd V(w, w);
  Eigen::VectorXd M(w);
  for (int j = 0; j < w; ++j) {
    for (int k = 0; k < w; ++k) V(j, k) = std::pow(d[lo + k] / S, j);
    const double e = sigma + j + 1;
    M[j] = std::pow(S, sigma + 1) / e * (std::pow(b / S, e) - std::pow(a / S, e));
  }
  CellRule r;
  r.lo = lo;
  r.c = V.fullPivLu().solve(M);
  return r;
}

// node weights W on one interval line so that sum W_i F_i ~ int r^sigma F dx.
// r_line may vanish simply at either end; those ends get moment-fitted cells.
inline Eigen::ArrayXd line_weights(const Eigen::ArrayXd& xs, const Eigen::ArrayXd& r_line,
                                   double sigma) {
  const int n = int(xs.size());
  if (n < 8) throw ResolutionTooLow("quadrature needs at least 8 nodes");
  const double rmax = r_line.abs().maxCoeff();
  const bool zl = sigma != 0.0 && std::abs(r_line[0]) <= 1e-10 * std::max(rmax, 1e-300);
  const bool zr = sigma != 0.0 && std::abs(r_line[n - 1]) <= 1e-10 * std::max(rmax, 1e-300);

  // psi = r / |x - z| at the nodes, with the limit r'(z) at the zero itself
  Eigen::ArrayXd psi_l, psi_r;
  if (zl) {
    psi_l = Eigen::ArrayXd::Ones(n);
    for (int i = 1; i < n; ++i) psi_l[i] = r_line[i] / xs[i];
    psi_l[0] = fd_weights(xs[0], xs.head(5), 1).dot(r_line.head(5).matrix());
  }
  if (zr) {
    psi_r = Eigen::ArrayXd::Ones(n);
    for (int i = 0; i < n - 1; ++i) psi_r[i] = r_line[i] / (xs[n - 1] - xs[i]);
    psi_r[n - 1] = -fd_weights(xs[n - 1], xs.tail(5), 1).dot(r_line.tail(5).matrix());
  }

  // the moment-fitted zone spans a fixed fraction of the line so the hand-off
  // to plain interpolatory cells happens where the weight is genuinely smooth
  const double extent = xs[n - 1] - xs[0];
  Eigen::ArrayXd W = Eigen::ArrayXd::Zero(n);
  for (int cell = 0; cell < n - 1; ++cell) {
    const double a = xs[cell], b = xs[cell + 1];
    const double reach = std::max(8.0 * (b - a), 0.25 * extent);
    const bool near_l = zl && a - xs[0] < reach;
    const bool near_r = !near_l && zr && xs[n - 1] - b < reach;
    if (near_l) {
      const CellRule cr = singular_cell(xs, cell, sigma);
      for (int k = 0; k < cr.c.size(); ++k) {
        const double p = psi_l[cr.lo + k];
        if (p <= 0) throw std::domain_error("weight function not positive near its zero");
        W[cr.lo + k] += cr.c[k] * std::pow(p, sigma);
      }
    } else if (near_r) {
      Eigen::ArrayXd d = (xs[n - 1] - xs).reverse();
      const CellRule cr = singular_cell(d, n - 2 - cell, sigma);
      for (int k = 0; k < cr.c.size(); ++k) {
        const int node = n - 1 - (cr.lo + k);
        const double p = psi_r[node];
        if (p <= 0) throw std::domain_error("weight function not positive near its zero");
        W[node] += cr.c[k] * std::pow(p, sigma);
      }
    } else {
      const CellRule cr = plain_cell(xs, cell);
      for (int k = 0; k < cr.c.size(); ++k) {
        const int node = cr.lo + k;
        W[node] += cr.c[k] * (sigma == 0.0 ? 1.0 : std::pow(r_line[node], sigma));
      }
    }
  }
  return W;
}

}  // namespace detail

// int r^sigma F over the grid.  Periodic axes use the trapezoid rule (the
// weight is smooth there); an interval axis gets the degenerate-aware rule
// line by line, so r need not factor over the axes.
inline double integrate_weighted(const Grid& g, const Field& r, double sigma, const Field& F) {
  if (r.size() != g.size() || F.size() != g.size())
    throw std::invalid_argument("field/grid size mismatch");
  if (g.dim() == 1) {
    if (g.axes[0].periodic) {
      const double h = g.axes[0].length / g.axes[0].n;
      Field v = sigma == 0.0 ? F : Field(r.pow(sigma) * F);
      return h * pairwise_sum(v);
    }
    const Eigen::ArrayXd W = detail::line_weights(g.x[0], r, sigma);
    Field v = W * F;
    return pairwise_sum(v);
  }
  const int n0 = g.axes[0].n, n1 = g.axes[1].n;
  Eigen::ArrayXd outer(n0);
  for (int i = 0; i < n0; ++i) {
    const Eigen::Index base = Eigen::Index(i) * n1;
    Eigen::ArrayXd rl = r.segment(base, n1), Fl = F.segment(base, n1);
    if (g.axes[1].periodic) {
      const double h1 = g.axes[1].length / n1;
      Field v = sigma == 0.0 ? Fl : Field(rl.pow(sigma) * Fl);
      outer[i] = h1 * pairwise_sum(v);
    } else {
      const Eigen::ArrayXd W = detail::line_weights(g.x[1], rl, sigma);
      Field v = W * Fl;
      outer[i] = pairwise_sum(v);
    }
  }
  if (g.axes[0].periodic) {
    const double h0 = g.axes[0].length / n0;
    return h0 * pairwise_sum(outer);
  }
  // interval outer axis: weight already absorbed per line, so plain rule here
  const Eigen::ArrayXd W0 =
      detail::line_weights(g.x[0], Eigen::ArrayXd::Ones(n0), 0.0);
  Eigen::ArrayXd v = W0 * outer;
  return pairwise_sum(v);
}

inline double integrate(const Grid& g, const Field& F) {
  return integrate_weighted(g, Field(Field::Ones(g.size())), 0.0, F);
}

}  // namespace vel
