#ifndef WILLMORE_GRID_HPP
#define WILLMORE_GRID_HPP

// Discrete domains (rectangle / disk / annulus), nodal fields, finite
// difference derivative operators and quadrature.
//
// Two grid modes:
//  - cartesian: uniform cell-centered grid with a boundary mask and cut-cell
//    quadrature weights,
//  - polar: structured (r, theta) grid for disk and annulus; derivatives are
//    taken in (r, theta) and mapped to cartesian components by the chain rule.
//    Radial spacing may be uniform or geometric (clustered towards an excised
//    singular point).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include "willmore/errors.hpp"

namespace willmore {

enum class ShapeKind { rectangle, disk, annulus };
enum class GridMode { cartesian, polar };
enum class NodeClass : std::uint8_t { interior, boundary_adjacent, exterior };

struct DiscreteDomain {
  ShapeKind shape = ShapeKind::disk;
  GridMode mode = GridMode::cartesian;

  int nx = 0, ny = 0;       // cartesian: cells per axis; polar: (nr, ntheta)
  double h = 0.0;           // nominal node spacing (polar: nominal radial step)
  double x0 = 0.0, y0 = 0.0;
  double hx = 0.0, hy = 0.0;

  double r_inner = 0.0, r_outer = 0.0; // disk: 0 .. R
  double rect_w = 0.0, rect_h = 0.0;
  double cx = 0.0, cy = 0.0;

  double excision_radius = 0.0;
  double sing_x = 0.0, sing_y = 0.0;

  // polar radial layout (size nx): node radii and radial cell widths
  std::vector<double> rad;
  std::vector<double> rad_dw;
  double dtheta = 0.0;

  std::vector<NodeClass> cls;
  std::vector<double> weight;

  int first_order_fallbacks = 0; // cartesian nodes forced to first-order stencils

  int idx(int i, int j) const { return j * nx + i; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }

  bool in_range(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

  bool active(int i, int j) const {
    return in_range(i, j) && cls[idx(i, j)] != NodeClass::exterior;
  }

  double theta(int j) const { return (j + 0.5) * dtheta; }

  double px(int i, int j) const {
    if (mode == GridMode::cartesian) return x0 + (i + 0.5) * hx;
    return cx + rad[i] * std::cos(theta(j));
  }
  double py(int i, int j) const {
    if (mode == GridMode::cartesian) return y0 + (j + 0.5) * hy;
    return cy + rad[i] * std::sin(theta(j));
  }

  double area() const {
    double s = 0.0;
    for (std::size_t n = 0; n < size(); ++n)
      if (cls[n] != NodeClass::exterior) s += weight[n];
    return s;
  }
};

struct ScalarField {
  const DiscreteDomain *dom = nullptr;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const DiscreteDomain &d) : dom(&d), v(d.size(), 0.0) {}
  ScalarField(const DiscreteDomain &d, const std::function<double(double, double)> &f)
      : dom(&d), v(d.size(), 0.0) {
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i)
        if (d.cls[d.idx(i, j)] != NodeClass::exterior) v[d.idx(i, j)] = f(d.px(i, j), d.py(i, j));
  }

  double &operator()(int i, int j) { return v[dom->idx(i, j)]; }
  double operator()(int i, int j) const { return v[dom->idx(i, j)]; }

  bool all_finite() const {
    for (std::size_t n = 0; n < v.size(); ++n)
      if (dom->cls[n] != NodeClass::exterior && !std::isfinite(v[n])) return false;
    return true;
  }
};

struct VectorField {
  ScalarField x, y;
  VectorField() = default;
  explicit VectorField(const DiscreteDomain &d) : x(d), y(d) {}
};

// Symmetric 2x2 tensor per node.
struct TensorField {
  ScalarField xx, xy, yy;
  TensorField() = default;
  explicit TensorField(const DiscreteDomain &d) : xx(d), xy(d), yy(d) {}
};

// ---------------------------------------------------------------------------
// Domain constructors

namespace detail {

// fraction of the cell centered at (px, py) covered by the shape indicator
inline double cell_fraction(double px, double py, double hx, double hy,
                            const std::function<bool(double, double)> &inside) {
  constexpr int ns = 4;
  int cnt = 0;
  for (int a = 0; a < ns; ++a)
    for (int b = 0; b < ns; ++b) {
      double sx = px + ((a + 0.5) / ns - 0.5) * hx;
      double sy = py + ((b + 0.5) / ns - 0.5) * hy;
      if (inside(sx, sy)) ++cnt;
    }
  return static_cast<double>(cnt) / (ns * ns);
}

inline void classify_cartesian(DiscreteDomain &d,
                               const std::function<bool(double, double)> &inside) {
  d.cls.assign(d.size(), NodeClass::exterior);
  d.weight.assign(d.size(), 0.0);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      double px = d.x0 + (i + 0.5) * d.hx, py = d.y0 + (j + 0.5) * d.hy;
      if (!inside(px, py)) continue;
      d.cls[d.idx(i, j)] = NodeClass::interior;
      d.weight[d.idx(i, j)] = d.hx * d.hy * cell_fraction(px, py, d.hx, d.hy, inside);
    }
  // boundary-adjacent: an active node with a missing 4-neighbor
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      if (d.cls[d.idx(i, j)] == NodeClass::exterior) continue;
      bool full = true;
      for (int b = -1; b <= 1 && full; ++b)
        for (int a = -1; a <= 1 && full; ++a)
          if (!d.active(i + a, j + b)) full = false;
      if (!full) d.cls[d.idx(i, j)] = NodeClass::boundary_adjacent;
    }
  // geometric fallback census: nodes where not even a 3-point one-sided
  // stencil fits along some axis
  d.first_order_fallbacks = 0;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      if (d.cls[d.idx(i, j)] == NodeClass::exterior) continue;
      bool okx = (d.active(i - 1, j) && d.active(i + 1, j)) ||
                 (d.active(i + 1, j) && d.active(i + 2, j)) ||
                 (d.active(i - 1, j) && d.active(i - 2, j));
      bool oky = (d.active(i, j - 1) && d.active(i, j + 1)) ||
                 (d.active(i, j + 1) && d.active(i, j + 2)) ||
                 (d.active(i, j - 1) && d.active(i, j - 2));
      if (!okx) ++d.first_order_fallbacks;
      if (!oky) ++d.first_order_fallbacks;
    }
}

} // namespace detail

inline DiscreteDomain make_rectangle(double wx, double wy, double h) {
  if (h <= 0) throw config_error("grid: node spacing h must be positive");
  DiscreteDomain d;
  d.shape = ShapeKind::rectangle;
  d.mode = GridMode::cartesian;
  d.rect_w = wx;
  d.rect_h = wy;
  d.h = h;
  d.nx = static_cast<int>(std::llround(wx / h));
  d.ny = static_cast<int>(std::llround(wy / h));
  if (d.nx < 5 || d.ny < 5) throw config_error("grid: domain too small for stencil");
  d.hx = wx / d.nx;
  d.hy = wy / d.ny;
  d.x0 = 0.0;
  d.y0 = 0.0;
  d.cls.assign(d.size(), NodeClass::interior);
  d.weight.assign(d.size(), d.hx * d.hy);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      if (i == 0 || j == 0 || i == d.nx - 1 || j == d.ny - 1)
        d.cls[d.idx(i, j)] = NodeClass::boundary_adjacent;
  return d;
}

inline DiscreteDomain make_disk_cartesian(double R, double h, double excision = 0.0) {
  if (h <= 0 || R <= 0) throw config_error("grid: disk requires R > 0, h > 0");
  DiscreteDomain d;
  d.shape = ShapeKind::disk;
  d.mode = GridMode::cartesian;
  d.r_outer = R;
  d.h = h;
  d.hx = d.hy = h;
  d.nx = d.ny = 2 * static_cast<int>(std::ceil(R / h)) + 4;
  if (d.nx < 8) throw config_error("grid: domain too small for stencil");
  d.x0 = -0.5 * d.nx * h;
  d.y0 = -0.5 * d.ny * h;
  d.excision_radius = excision;
  auto inside = [R, excision](double x, double y) {
    double r2 = x * x + y * y;
    return r2 < R * R && (excision <= 0 || r2 >= excision * excision);
  };
  detail::classify_cartesian(d, inside);
  return d;
}

inline DiscreteDomain make_annulus_cartesian(double r0, double r1, double h) {
  if (!(0 < r0 && r0 < r1)) throw config_error("grid: annulus requires 0 < r_inner < r_outer");
  DiscreteDomain d;
  d.shape = ShapeKind::annulus;
  d.mode = GridMode::cartesian;
  d.r_inner = r0;
  d.r_outer = r1;
  d.h = h;
  d.hx = d.hy = h;
  d.nx = d.ny = 2 * static_cast<int>(std::ceil(r1 / h)) + 4;
  d.x0 = -0.5 * d.nx * h;
  d.y0 = -0.5 * d.ny * h;
  auto inside = [r0, r1](double x, double y) {
    double r2 = x * x + y * y;
    return r2 > r0 * r0 && r2 < r1 * r1;
  };
  detail::classify_cartesian(d, inside);
  return d;
}

namespace detail {

inline void finish_polar(DiscreteDomain &d, const std::vector<double> &edges) {
  int nr = static_cast<int>(edges.size()) - 1;
  d.nx = nr;
  d.dtheta = 2.0 * std::numbers::pi / d.ny;
  d.rad.resize(nr);
  d.rad_dw.resize(nr);
  for (int i = 0; i < nr; ++i) {
    d.rad[i] = 0.5 * (edges[i] + edges[i + 1]);
    d.rad_dw[i] = edges[i + 1] - edges[i];
  }
  d.cls.assign(d.size(), NodeClass::interior);
  d.weight.assign(d.size(), 0.0);
  bool inner_open = edges.front() > 0.0; // annulus or excised disk
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < nr; ++i) {
      d.weight[d.idx(i, j)] = d.rad[i] * d.rad_dw[i] * d.dtheta;
      if (i == nr - 1 || (inner_open && i == 0))
        d.cls[d.idx(i, j)] = NodeClass::boundary_adjacent;
    }
}

} // namespace detail

// Polar disk grid; excision > 0 removes B_excision around the center and
// optionally clusters radial nodes geometrically towards it.
inline DiscreteDomain make_disk_polar(double R, int nr, int ntheta, double excision = 0.0,
                                      bool geometric = false) {
  if (R <= 0 || nr < 4 || ntheta < 8) throw config_error("grid: polar disk too small for stencil");
  if (ntheta % 2 != 0) throw config_error("grid: ntheta must be even");
  if (geometric && excision <= 0)
    throw config_error("grid: geometric radial spacing requires an excision radius");
  DiscreteDomain d;
  d.shape = ShapeKind::disk;
  d.mode = GridMode::polar;
  d.r_outer = R;
  d.ny = ntheta;
  d.excision_radius = excision;
  d.h = (R - excision) / nr;
  std::vector<double> edges(nr + 1);
  for (int m = 0; m <= nr; ++m)
    edges[m] = geometric ? excision * std::pow(R / excision, static_cast<double>(m) / nr)
                         : excision + (R - excision) * static_cast<double>(m) / nr;
  detail::finish_polar(d, edges);
  return d;
}

inline DiscreteDomain make_annulus_polar(double r0, double r1, int nr, int ntheta) {
  if (!(0 < r0 && r0 < r1) || nr < 4 || ntheta < 8)
    throw config_error("grid: polar annulus too small for stencil");
  if (ntheta % 2 != 0) throw config_error("grid: ntheta must be even");
  DiscreteDomain d;
  d.shape = ShapeKind::annulus;
  d.mode = GridMode::polar;
  d.r_inner = r0;
  d.r_outer = r1;
  d.ny = ntheta;
  d.h = (r1 - r0) / nr;
  std::vector<double> edges(nr + 1);
  for (int m = 0; m <= nr; ++m) edges[m] = r0 + (r1 - r0) * static_cast<double>(m) / nr;
  detail::finish_polar(d, edges);
  return d;
}

// Polar grid with radial nodes clustered geometrically towards a circle
// r = rc from both sides (used for collar studies around a singular circle).
inline DiscreteDomain make_disk_polar_collar(double R, double rc, double delta_min, int nr_half,
                                             int ntheta) {
  if (!(0 < delta_min && rc - delta_min > 0 && rc + delta_min < R))
    throw config_error("grid: collar grid requires 0 < delta_min < min(rc, R - rc)");
  if (ntheta % 2 != 0) throw config_error("grid: ntheta must be even");
  DiscreteDomain d;
  d.shape = ShapeKind::disk;
  d.mode = GridMode::polar;
  d.r_outer = R;
  d.ny = ntheta;
  d.h = delta_min;
  std::vector<double> edges;
  // inner side: uniform from a small core radius out, then geometric into rc
  int nu = nr_half / 2;
  double core = rc * 0.25;
  for (int m = 0; m <= nu; ++m) edges.push_back(core * static_cast<double>(m) / nu);
  double inner_gap = rc - core;
  for (int m = 1; m <= nr_half; ++m)
    edges.push_back(rc - inner_gap * std::pow(delta_min / inner_gap, static_cast<double>(m) / nr_half));
  // outer side mirrored, then uniform out to R
  double outer_gap = std::min(rc - core, R - rc - delta_min);
  for (int m = nr_half; m >= 1; --m)
    edges.push_back(rc + outer_gap * std::pow(delta_min / outer_gap, static_cast<double>(m) / nr_half));
  double tail0 = rc + outer_gap;
  for (int m = 1; m <= nu; ++m) edges.push_back(tail0 + (R - tail0) * static_cast<double>(m) / nu);
  detail::finish_polar(d, edges);
  return d;
}

// ---------------------------------------------------------------------------
// Derivative operators

namespace detail {

// derivative at x of the quadratic through (xa,fa), (xb,fb), (xc,fc)
inline double lagrange3_deriv(double xa, double xb, double xc, double fa, double fb, double fc,
                              double x) {
  double la = (2 * x - xb - xc) / ((xa - xb) * (xa - xc));
  double lb = (2 * x - xa - xc) / ((xb - xa) * (xb - xc));
  double lc = (2 * x - xa - xb) / ((xc - xa) * (xc - xb));
  return fa * la + fb * lb + fc * lc;
}

template <class F>
inline double cart_axis_deriv_fn(const DiscreteDomain &d, F &&u, int i, int j, int axis) {
  int di = axis == 0 ? 1 : 0, dj = axis == 0 ? 0 : 1;
  double hh = axis == 0 ? d.hx : d.hy;
  auto ok = [&](int k) { return d.active(i + k * di, j + k * dj); };
  auto f = [&](int k) { return u(i + k * di, j + k * dj); };
  bool m1 = ok(-1), p1 = ok(1);
  if (m1 && p1) return (f(1) - f(-1)) / (2 * hh);
  if (p1 && ok(2)) return (-3 * f(0) + 4 * f(1) - f(2)) / (2 * hh);
  if (m1 && ok(-2)) return (3 * f(0) - 4 * f(-1) + f(-2)) / (2 * hh);
  if (p1) return (f(1) - f(0)) / hh;
  if (m1) return (f(0) - f(-1)) / hh;
  return 0.0;
}

inline double cart_axis_deriv(const DiscreteDomain &d, const ScalarField &u, int i, int j,
                              int axis) {
  return cart_axis_deriv_fn(d, [&u](int a, int b) { return u(a, b); }, i, j, axis);
}

inline double cart_axis_deriv2(const DiscreteDomain &d, const ScalarField &u, int i, int j,
                               int axis) {
  int di = axis == 0 ? 1 : 0, dj = axis == 0 ? 0 : 1;
  double h2 = axis == 0 ? d.hx * d.hx : d.hy * d.hy;
  auto ok = [&](int k) { return d.active(i + k * di, j + k * dj); };
  auto f = [&](int k) { return u(i + k * di, j + k * dj); };
  if (ok(-1) && ok(1)) return (f(-1) - 2 * f(0) + f(1)) / h2;
  if (ok(1) && ok(2) && ok(3)) return (2 * f(0) - 5 * f(1) + 4 * f(2) - f(3)) / h2;
  if (ok(-1) && ok(-2) && ok(-3)) return (2 * f(0) - 5 * f(-1) + 4 * f(-2) - f(-3)) / h2;
  if (ok(1) && ok(2)) return (f(0) - 2 * f(1) + f(2)) / h2; // first-order fallback
  if (ok(-1) && ok(-2)) return (f(0) - 2 * f(-1) + f(-2)) / h2;
  return 0.0;
}

inline double cart_cross_deriv(const DiscreteDomain &d, const ScalarField &u, int i, int j) {
  if (d.active(i + 1, j + 1) && d.active(i + 1, j - 1) && d.active(i - 1, j + 1) &&
      d.active(i - 1, j - 1))
    return (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1)) /
           (4 * d.hx * d.hy);
  // near-boundary fallback: x-derivative of the nodal y-derivative
  return cart_axis_deriv_fn(
      d, [&](int a, int b) { return cart_axis_deriv(d, u, a, b, 1); }, i, j, 0);
}

// radial value lookup; on full disks negative indices reach across the origin
// to the opposite ray, so stencils stay centered near r = 0
inline bool polar_rvalue(const DiscreteDomain &d, const ScalarField &u, int i, int j, double &r,
                         double &val) {
  if (i >= 0 && i < d.nx) {
    r = d.rad[i];
    val = u(i, j);
    return true;
  }
  int iop = -1 - i;
  if (i < 0 && iop < d.nx && d.shape == ShapeKind::disk && d.excision_radius <= 0) {
    int jop = (j + d.ny / 2) % d.ny;
    r = -d.rad[iop];
    val = u(iop, jop);
    return true;
  }
  return false;
}

struct PolarDeriv {
  double ur, ut; // du/dr, du/dtheta
};

// periodic 4th-order theta stencils; the extra order keeps the 1/r and 1/r^2
// chain-rule factors from degrading accuracy on the innermost ring
inline double theta_deriv(const DiscreteDomain &d, const ScalarField &u, int i, int j) {
  auto at = [&](int dj) { return u(i, (j + dj + d.ny) % d.ny); };
  return (at(-2) - 8 * at(-1) + 8 * at(1) - at(2)) / (12 * d.dtheta);
}

inline double theta_deriv2(const DiscreteDomain &d, const ScalarField &u, int i, int j) {
  auto at = [&](int dj) { return u(i, (j + dj + d.ny) % d.ny); };
  return (-at(-2) + 16 * at(-1) - 30 * at(0) + 16 * at(1) - at(2)) /
         (12 * d.dtheta * d.dtheta);
}

// derivative of the cubic through 4 nodes, evaluated at x
inline double lagrange4_deriv(const double xs[4], const double fs[4], double x) {
  double out = 0.0;
  for (int k = 0; k < 4; ++k) {
    double denom = 1.0, acc = 0.0;
    for (int m = 0; m < 4; ++m)
      if (m != k) {
        denom *= xs[k] - xs[m];
        double p = 1.0;
        for (int n = 0; n < 4; ++n)
          if (n != k && n != m) p *= x - xs[n];
        acc += p;
      }
    out += fs[k] * acc / denom;
  }
  return out;
}

inline PolarDeriv polar_rt_deriv(const DiscreteDomain &d, const ScalarField &u, int i, int j) {
  PolarDeriv g{};
  g.ut = theta_deriv(d, u, i, j);
  // r: cubic through 4 nodes, shifted toward the available side at open ends;
  // the O(dr^3) error keeps u_r/r terms second order on the innermost ring
  int lo = i - 1;
  double rr, vv;
  while (lo > i - 3 && !polar_rvalue(d, u, lo, j, rr, vv)) ++lo;
  while (!polar_rvalue(d, u, lo + 3, j, rr, vv)) --lo;
  double xs[4], fs[4];
  for (int k = 0; k < 4; ++k) polar_rvalue(d, u, lo + k, j, xs[k], fs[k]);
  g.ur = lagrange4_deriv(xs, fs, d.rad[i]);
  return g;
}

} // namespace detail

// nodal cartesian gradient of u; second-order stencils, one-sided at open ends
inline void gradient_at(const DiscreteDomain &d, const ScalarField &u, int i, int j, double &gx,
                        double &gy) {
  if (d.mode == GridMode::cartesian) {
    gx = detail::cart_axis_deriv(d, u, i, j, 0);
    gy = detail::cart_axis_deriv(d, u, i, j, 1);
    return;
  }
  auto [ur, ut] = detail::polar_rt_deriv(d, u, i, j);
  double th = d.theta(j), r = d.rad[i];
  double c = std::cos(th), s = std::sin(th);
  gx = c * ur - s / r * ut;
  gy = s * ur + c / r * ut;
}

inline VectorField gradient(const ScalarField &u) {
  const DiscreteDomain &d = *u.dom;
  if (!u.all_finite()) throw precondition_error("gradient: field has non-finite nodes");
  VectorField g(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      if (d.cls[d.idx(i, j)] == NodeClass::exterior) continue;
      gradient_at(d, u, i, j, g.x(i, j), g.y(i, j));
    }
  return g;
}

namespace detail {

// second r-derivative: nonuniform 3-point centered, 4-point one-sided at ends
inline double polar_deriv2_r(const DiscreteDomain &d, const ScalarField &u, int i, int j) {
  double ra, rb = d.rad[i], rc, fa, fb = u(i, j), fc;
  bool has_m = polar_rvalue(d, u, i - 1, j, ra, fa);
  bool has_p = polar_rvalue(d, u, i + 1, j, rc, fc);
  if (has_m && has_p)
    return 2 * (fa / ((ra - rb) * (ra - rc)) + fb / ((rb - ra) * (rb - rc)) +
                fc / ((rc - ra) * (rc - rb)));
  // one-sided cubic through 4 radial nodes, evaluated at rb
  int dir = has_p ? 1 : -1;
  double xs[4], fs[4];
  for (int k = 0; k < 4; ++k) polar_rvalue(d, u, i + dir * k, j, xs[k], fs[k]);
  double out = 0.0;
  for (int k = 0; k < 4; ++k) {
    double denom = 1.0, ssum = 0.0;
    for (int m = 0; m < 4; ++m)
      if (m != k) {
        denom *= xs[k] - xs[m];
        ssum += rb - xs[m];
      }
    // second derivative of the cubic Lagrange basis: 2 * sum of the remaining
    // linear factors evaluated at rb
    double acc = 0.0;
    for (int m = 0; m < 4; ++m)
      if (m != k) acc += ssum - (rb - xs[m]);
    out += fs[k] * acc / denom;
  }
  return out;
}

} // namespace detail

// Hessian entries at one node; centered cross stencil for the mixed term.
inline void hessian_at(const DiscreteDomain &d, const ScalarField &u, int i, int j, double &hxx,
                       double &hxy, double &hyy) {
  if (d.mode == GridMode::cartesian) {
    hxx = detail::cart_axis_deriv2(d, u, i, j, 0);
    hyy = detail::cart_axis_deriv2(d, u, i, j, 1);
    hxy = detail::cart_cross_deriv(d, u, i, j);
    return;
  }
  auto [ur, ut] = detail::polar_rt_deriv(d, u, i, j);
  double urr = detail::polar_deriv2_r(d, u, i, j);
  double utt = detail::theta_deriv2(d, u, i, j);
  auto ur_at = [&](int dj) {
    return detail::polar_rt_deriv(d, u, i, (j + dj + d.ny) % d.ny).ur;
  };
  double urt = (ur_at(-2) - 8 * ur_at(-1) + 8 * ur_at(1) - ur_at(2)) / (12 * d.dtheta);
  double r = d.rad[i], th = d.theta(j);
  double c = std::cos(th), s = std::sin(th);
  hxx = c * c * urr - 2 * c * s * urt / r + s * s * utt / (r * r) + s * s * ur / r +
        2 * c * s * ut / (r * r);
  hyy = s * s * urr + 2 * c * s * urt / r + c * c * utt / (r * r) + c * c * ur / r -
        2 * c * s * ut / (r * r);
  hxy = c * s * urr + (c * c - s * s) * urt / r - c * s * utt / (r * r) - c * s * ur / r -
        (c * c - s * s) * ut / (r * r);
}

inline TensorField hessian(const ScalarField &u) {
  const DiscreteDomain &d = *u.dom;
  if (!u.all_finite()) throw precondition_error("hessian: field has non-finite nodes");
  TensorField H(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      if (d.cls[d.idx(i, j)] == NodeClass::exterior) continue;
      hessian_at(d, u, i, j, H.xx(i, j), H.xy(i, j), H.yy(i, j));
    }
  return H;
}

inline double divergence_at(const DiscreteDomain &d, const VectorField &w, int i, int j) {
  double ax, ay, bx, by;
  gradient_at(d, w.x, i, j, ax, ay);
  gradient_at(d, w.y, i, j, bx, by);
  return ax + by;
}

inline ScalarField divergence(const VectorField &w) {
  const DiscreteDomain &d = *w.x.dom;
  ScalarField out(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      if (d.cls[d.idx(i, j)] == NodeClass::exterior) continue;
      out(i, j) = divergence_at(d, w, i, j);
    }
  return out;
}

// deterministic fixed-order reduction
inline double integrate(const ScalarField &f) {
  const DiscreteDomain &d = *f.dom;
  double s = 0.0;
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d.cls[n] != NodeClass::exterior) s += d.weight[n] * f.v[n];
  return s;
}

// bilinear interpolation in index space; exterior corners are dropped and the
// remaining weights renormalized, so points near a cut boundary still resolve
inline double interpolate(const ScalarField &u, double x, double y) {
  const DiscreteDomain &d = *u.dom;
  int i, j;
  double ti, tj;
  bool wrap_j = false;
  if (d.mode == GridMode::cartesian) {
    double fx = (x - d.x0) / d.hx - 0.5, fy = (y - d.y0) / d.hy - 0.5;
    i = std::clamp(static_cast<int>(std::floor(fx)), 0, d.nx - 2);
    j = std::clamp(static_cast<int>(std::floor(fy)), 0, d.ny - 2);
    ti = fx - i;
    tj = fy - j;
  } else {
    double r = std::hypot(x - d.cx, y - d.cy);
    double th = std::atan2(y - d.cy, x - d.cx);
    if (th < 0) th += 2 * std::numbers::pi;
    double ft = th / d.dtheta - 0.5;
    j = static_cast<int>(std::floor(ft));
    tj = ft - j;
    j = (j + d.ny) % d.ny;
    wrap_j = true;
    auto it = std::upper_bound(d.rad.begin(), d.rad.end(), r);
    i = std::clamp(static_cast<int>(it - d.rad.begin()) - 1, 0, d.nx - 2);
    ti = std::clamp((r - d.rad[i]) / (d.rad[i + 1] - d.rad[i]), 0.0, 1.0);
  }
  double wsum = 0.0, acc = 0.0;
  for (int dj = 0; dj < 2; ++dj)
    for (int di = 0; di < 2; ++di) {
      int jj = wrap_j ? (j + dj) % d.ny : j + dj;
      if (d.cls[d.idx(i + di, jj)] == NodeClass::exterior) continue;
      double w = (di ? ti : 1 - ti) * (dj ? tj : 1 - tj);
      wsum += w;
      acc += w * u(i + di, jj);
    }
  if (wsum <= 1e-14) throw precondition_error("interpolate: point has no active neighbors");
  return acc / wsum;
}

inline double integrate(const DiscreteDomain &d, const std::function<double(double, double)> &f) {
  double s = 0.0;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      if (d.cls[d.idx(i, j)] != NodeClass::exterior) s += d.weight[d.idx(i, j)] * f(d.px(i, j), d.py(i, j));
  return s;
}

} // namespace willmore

#endif
