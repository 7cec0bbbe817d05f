#ifndef WILLMORE_BOUNDARY_HPP
#define WILLMORE_BOUNDARY_HPP

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "willmore/errors.hpp"
#include "willmore/graphgeom.hpp"
#include "willmore/grid.hpp"

namespace willmore {

// One closed boundary component, sampled at uniform parameter steps. The
// orientation pairs the outward normal nu with the tangent tau so that
// nu1 = tau2, nu2 = -tau1; kappa is then nonnegative on convex parts and
// negative on the inner circle of an annulus.
struct BoundaryComponent {
  std::vector<double> s;            // cumulative arclength at samples
  std::vector<double> cx, cy;       // positions on the curve
  std::vector<double> tx, ty;       // unit tangent
  std::vector<double> nx, ny;       // outward normal of the domain
  std::vector<double> kappa;        // signed curvature
  std::vector<double> sigma, dsigma; // speed |c'(t)| and its t-derivative
  double dt = 0.0;                  // parameter step
  double length = 0.0;

  std::size_t size() const { return s.size(); }
  double ds(std::size_t i) const { return sigma[i] * dt; }
};

struct BoundaryCurve {
  std::vector<BoundaryComponent> comps;
  int m() const { return static_cast<int>(comps.size()); }
  int chi() const { return 2 - m(); }

  double integrate(const std::vector<std::vector<double>> &f) const {
    double acc = 0.0;
    for (std::size_t c = 0; c < comps.size(); ++c)
      for (std::size_t i = 0; i < comps[c].size(); ++i) acc += f[c][i] * comps[c].ds(i);
    return acc;
  }
};

namespace detail {

inline BoundaryComponent circle_component(double cx0, double cy0, double R, int n,
                                          bool domain_inside) {
  if (R <= 0 || n < 16) throw config_error("boundary: circle needs R > 0 and n >= 16");
  BoundaryComponent c;
  c.dt = 2 * std::numbers::pi / n;
  double orient = domain_inside ? 1.0 : -1.0; // traversal keeping the domain left
  for (int i = 0; i < n; ++i) {
    double t = orient * (i + 0.5) * c.dt;
    double co = std::cos(t), si = std::sin(t);
    c.cx.push_back(cx0 + R * co);
    c.cy.push_back(cy0 + R * si);
    c.tx.push_back(orient * -si);
    c.ty.push_back(orient * co);
    c.nx.push_back(orient * co);
    c.ny.push_back(orient * si);
    c.kappa.push_back(orient / R);
    c.sigma.push_back(R);
    c.dsigma.push_back(0.0);
    c.s.push_back((i + 0.5) * c.dt * R);
  }
  c.length = 2 * std::numbers::pi * R;
  return c;
}

} // namespace detail

inline BoundaryCurve boundary_circle(double R, int n, double cx = 0.0, double cy = 0.0) {
  BoundaryCurve b;
  b.comps.push_back(detail::circle_component(cx, cy, R, n, true));
  return b;
}

inline BoundaryCurve boundary_annulus(double r0, double r1, int n_inner, int n_outer) {
  if (!(0 < r0 && r0 < r1)) throw config_error("boundary: annulus requires 0 < r_inner < r_outer");
  BoundaryCurve b;
  b.comps.push_back(detail::circle_component(0, 0, r1, n_outer, true));
  b.comps.push_back(detail::circle_component(0, 0, r0, n_inner, false));
  return b;
}

inline BoundaryCurve boundary_ellipse(double a, double b, int n) {
  if (a <= 0 || b <= 0 || n < 16) throw config_error("boundary: ellipse needs a, b > 0, n >= 16");
  BoundaryCurve out;
  BoundaryComponent c;
  c.dt = 2 * std::numbers::pi / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = (i + 0.5) * c.dt;
    double co = std::cos(t), si = std::sin(t);
    double sg = std::hypot(a * si, b * co);
    c.cx.push_back(a * co);
    c.cy.push_back(b * si);
    c.tx.push_back(-a * si / sg);
    c.ty.push_back(b * co / sg);
    c.nx.push_back(b * co / sg);
    c.ny.push_back(a * si / sg);
    c.kappa.push_back(a * b / (sg * sg * sg));
    c.sigma.push_back(sg);
    c.dsigma.push_back((a * a - b * b) * si * co / sg);
    s += sg * c.dt; // midpoint accumulation; spectrally accurate on the circle
    c.s.push_back(s - 0.5 * sg * c.dt);
  }
  c.length = s;
  out.comps.push_back(c);
  return out;
}

// Dirichlet data along the curve: phi and its first two arclength
// derivatives, plus the outward normal derivative of u.
struct BoundaryTrace {
  std::vector<std::vector<double>> phi, dphi, ddphi, unu;
};

namespace detail {

// arclength derivatives from periodic parameter samples:
// phi_s = phi_t / sigma, phi_ss = (phi_tt - phi_s * dsigma) / sigma^2
inline void arclength_derivs(const BoundaryComponent &c, const std::vector<double> &phi,
                             std::vector<double> &dphi, std::vector<double> &ddphi) {
  int n = static_cast<int>(c.size());
  dphi.resize(n);
  ddphi.resize(n);
  auto at = [&](int i, int dj) { return phi[(i + dj + n) % n]; };
  for (int i = 0; i < n; ++i) {
    double pt = (at(i, -2) - 8 * at(i, -1) + 8 * at(i, 1) - at(i, 2)) / (12 * c.dt);
    double ptt = (-at(i, -2) + 16 * at(i, -1) - 30 * at(i, 0) + 16 * at(i, 1) - at(i, 2)) /
                 (12 * c.dt * c.dt);
    dphi[i] = pt / c.sigma[i];
    ddphi[i] = (ptt - dphi[i] * c.dsigma[i]) / (c.sigma[i] * c.sigma[i]);
  }
}

} // namespace detail

inline BoundaryTrace make_trace(const BoundaryCurve &curve,
                                const std::function<double(double, double)> &phi_xy,
                                const std::function<double(double, double)> &unu_xy) {
  BoundaryTrace t;
  for (const auto &c : curve.comps) {
    std::vector<double> phi(c.size()), unu(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      phi[i] = phi_xy(c.cx[i], c.cy[i]);
      unu[i] = unu_xy(c.cx[i], c.cy[i]);
    }
    std::vector<double> dphi, ddphi;
    detail::arclength_derivs(c, phi, dphi, ddphi);
    t.phi.push_back(std::move(phi));
    t.dphi.push_back(std::move(dphi));
    t.ddphi.push_back(std::move(ddphi));
    t.unu.push_back(std::move(unu));
  }
  return t;
}

// Trace read off a grid field: u is sampled by interpolation at three depths
// along the inward normal and extrapolated to the boundary, giving both phi
// and u_nu to second order in the grid spacing.
inline BoundaryTrace trace_from_field(const ScalarField &u, const BoundaryCurve &curve) {
  const DiscreteDomain &d = *u.dom;
  double hs = (d.mode == GridMode::cartesian) ? std::max(d.hx, d.hy)
                                              : (d.rad.back() - d.rad.front()) / (d.nx - 1);
  BoundaryTrace t;
  for (const auto &c : curve.comps) {
    std::vector<double> phi(c.size()), unu(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      double dep[3], val[3];
      for (int k = 0; k < 3; ++k) {
        dep[k] = (1.5 + k) * hs;
        val[k] = interpolate(u, c.cx[i] - dep[k] * c.nx[i], c.cy[i] - dep[k] * c.ny[i]);
      }
      // quadratic in the depth variable, evaluated and differentiated at 0
      double l0 = dep[1] * dep[2] / ((dep[0] - dep[1]) * (dep[0] - dep[2]));
      double l1 = dep[0] * dep[2] / ((dep[1] - dep[0]) * (dep[1] - dep[2]));
      double l2 = dep[0] * dep[1] / ((dep[2] - dep[0]) * (dep[2] - dep[1]));
      phi[i] = val[0] * l0 + val[1] * l1 + val[2] * l2;
      double m0 = -(dep[1] + dep[2]) / ((dep[0] - dep[1]) * (dep[0] - dep[2]));
      double m1 = -(dep[0] + dep[2]) / ((dep[1] - dep[0]) * (dep[1] - dep[2]));
      double m2 = -(dep[0] + dep[1]) / ((dep[2] - dep[0]) * (dep[2] - dep[1]));
      unu[i] = -(val[0] * m0 + val[1] * m1 + val[2] * m2);
    }
    std::vector<double> dphi, ddphi;
    detail::arclength_derivs(c, phi, dphi, ddphi);
    t.phi.push_back(std::move(phi));
    t.dphi.push_back(std::move(dphi));
    t.ddphi.push_back(std::move(ddphi));
    t.unu.push_back(std::move(unu));
  }
  return t;
}

struct GeodesicReport {
  std::vector<std::vector<double>> kg;
  double integral = 0.0;     // contour integral of kappa_g
  double integral_abs = 0.0; // contour integral of |kappa_g|
  double bound_rhs = 0.0;    // contour integral of |phi''| + |kappa|
};

// kappa_g = (-u_nu phi'' + kappa (1+phi'^2)) / ((1+phi'^2+u_nu^2)^{1/2} (1+phi'^2)^{3/2})
// from <Y'', N x T> / |Y'|^2 for the lifted curve Y(s) = (c(s), phi(s)); the
// contour integrals carry the surface line element dsigma = sqrt(1+phi'^2) ds
inline GeodesicReport geodesic_curvature(const BoundaryTrace &t, const BoundaryCurve &curve) {
  if (t.phi.size() != curve.comps.size())
    throw precondition_error("geodesic_curvature: trace and curve component counts differ");
  GeodesicReport r;
  for (std::size_t c = 0; c < curve.comps.size(); ++c) {
    const auto &comp = curve.comps[c];
    std::vector<double> kg(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
      double p1 = t.dphi[c][i], p2 = t.ddphi[c][i], un = t.unu[c][i], k = comp.kappa[i];
      double a = 1 + p1 * p1;
      kg[i] = (-un * p2 + k * a) / (std::sqrt(a + un * un) * a * std::sqrt(a));
      double dsigma = std::sqrt(a) * comp.ds(i);
      r.integral += kg[i] * dsigma;
      r.integral_abs += std::abs(kg[i]) * dsigma;
      r.bound_rhs += (std::abs(p2) + std::abs(k)) * comp.ds(i);
    }
    r.kg.push_back(std::move(kg));
  }
  return r;
}

// Normal curvature of the lifted boundary curve Y(s) = (c(s), phi(s)) with
// respect to the upward graph normal N = (-grad u, 1)/Q. On the boundary
// grad u = phi' tau + u_nu nu, so N.Y'' / |Y'|^2 reduces to trace data.
inline std::vector<std::vector<double>>
normal_curvature(const ScalarField &u, const BoundaryCurve &curve, const BoundaryTrace &t,
                 double match_tol = 0.05) {
  BoundaryTrace meas = trace_from_field(u, curve);
  for (std::size_t c = 0; c < curve.comps.size(); ++c)
    for (std::size_t i = 0; i < curve.comps[c].size(); ++i)
      if (std::abs(meas.phi[c][i] - t.phi[c][i]) > match_tol)
        throw precondition_error("normal_curvature: field trace does not match phi");
  std::vector<std::vector<double>> kn;
  for (std::size_t c = 0; c < curve.comps.size(); ++c) {
    const auto &comp = curve.comps[c];
    std::vector<double> v(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) {
      double p1 = t.dphi[c][i], p2 = t.ddphi[c][i], un = t.unu[c][i], k = comp.kappa[i];
      double q = std::sqrt(1 + p1 * p1 + un * un);
      v[i] = (p2 + k * un) / ((1 + p1 * p1) * q);
    }
    kn.push_back(std::move(v));
  }
  return kn;
}

inline double gauss_bonnet_residual(const GeometryBundle &b, const GeodesicReport &g, int chi) {
  ScalarField kq(*b.dom);
  for (std::size_t n = 0; n < b.dom->size(); ++n)
    if (b.dom->cls[n] != NodeClass::exterior) kq.v[n] = b.K.v[n] * b.Q.v[n];
  return std::abs(integrate(kq) + g.integral - 2 * std::numbers::pi * chi);
}

struct BoundaryNorms {
  double phi_w21 = 0.0;  // contour integral of |phi| + |phi'| + |phi''|
  double kappa_l1 = 0.0; // contour integral of |kappa|
};

inline BoundaryNorms boundary_norms(const BoundaryTrace &t, const BoundaryCurve &curve) {
  BoundaryNorms n;
  for (std::size_t c = 0; c < curve.comps.size(); ++c) {
    const auto &comp = curve.comps[c];
    for (std::size_t i = 0; i < comp.size(); ++i) {
      n.phi_w21 +=
          (std::abs(t.phi[c][i]) + std::abs(t.dphi[c][i]) + std::abs(t.ddphi[c][i])) * comp.ds(i);
      n.kappa_l1 += std::abs(comp.kappa[i]) * comp.ds(i);
    }
  }
  return n;
}

} // namespace willmore

#endif
