#ifndef WILLMORE_ENERGY_HPP
#define WILLMORE_ENERGY_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "willmore/boundary.hpp"
#include "willmore/errors.hpp"
#include "willmore/graphgeom.hpp"
#include "willmore/grid.hpp"

namespace willmore {

struct Certificates {
  double kbound_lhs = 0, kbound_rhs = 0;   // |int K Q| vs trace-data bound
  double abound_lhs = 0, abound_rhs = 0;   // int |A|^2 Q vs 4 W0 + trace terms
  double gamma_gap_lhs = 0, gamma_gap_rhs = 0; // |W0 - Wgamma| vs |gamma| bound
  double ah_identity_gap = 0;              // |int |A|^2 Q - (4 W0 - 2 int K Q)|
  double apriori_ratio = 0;                // (sup|u| + area) / (W0^2 + 1)
};

struct EnergyReport {
  double area = 0;         // int Q
  double willmore_H = 0;   // (1/4) int H^2 Q
  double total_gauss = 0;  // int K Q, evaluated as det(D2u)/Q^3
  double W0 = 0;
  double Wgamma = 0;
  double gamma = 0;
  double sup_u = 0;
  Certificates cert;
  bool has_cert = false;
};

// Energies use the divergence-form H: the same operator the gradient-flow
// and the integration-by-parts identities difference, so reductions like
// helfrich(alpha=0, H0=0) == Wgamma hold bitwise.
inline EnergyReport willmore_energy(const ScalarField &u, double gamma = 0.0) {
  const DiscreteDomain &d = *u.dom;
  GeometryBundle b = geometry_bundle(u);
  EnergyReport r;
  r.gamma = gamma;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    double w = d.weight[n], q = b.Q.v[n], hd = b.H_div.v[n];
    double uxx = b.hess.xx.v[n], uxy = b.hess.xy.v[n], uyy = b.hess.yy.v[n];
    r.area += w * q;
    r.willmore_H += w * 0.25 * hd * hd * q;
    r.total_gauss += w * (uxx * uyy - uxy * uxy) / (q * q * q);
    r.sup_u = std::max(r.sup_u, std::abs(u.v[n]));
  }
  r.W0 = r.willmore_H;
  r.Wgamma = r.W0 - gamma * r.total_gauss;
  return r;
}

struct HelfrichReport {
  double value = 0;
  bool physical = false; // alpha >= 0, 0 <= gamma <= 1, gamma H0^2 <= 4 alpha (1-gamma)
};

inline HelfrichReport helfrich(const ScalarField &u, double alpha, double H0, double gamma) {
  const DiscreteDomain &d = *u.dom;
  GeometryBundle b = geometry_bundle(u);
  HelfrichReport r;
  // accumulated term by term in the same order as willmore(), so the
  // alpha = 0, H0 = 0 reduction to Wgamma is bitwise
  double area = 0, bendterm = 0, gauss = 0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    double w = d.weight[n], q = b.Q.v[n], hd = b.H_div.v[n];
    double uxx = b.hess.xx.v[n], uxy = b.hess.xy.v[n], uyy = b.hess.yy.v[n];
    double bend = hd - H0;
    area += w * q;
    bendterm += w * 0.25 * bend * bend * q;
    gauss += w * (uxx * uyy - uxy * uxy) / (q * q * q);
  }
  r.value = bendterm - gamma * gauss;
  if (alpha != 0) r.value += alpha * area;
  r.physical = alpha >= 0 && 0 <= gamma && gamma <= 1 && gamma * H0 * H0 <= 4 * alpha * (1 - gamma);
  return r;
}

namespace detail {

inline void require_trace_match(const ScalarField &u, const BoundaryCurve &curve,
                                const BoundaryTrace &t, double tol) {
  BoundaryTrace meas = trace_from_field(u, curve);
  for (std::size_t c = 0; c < curve.comps.size(); ++c)
    for (std::size_t i = 0; i < curve.comps[c].size(); ++i)
      if (std::abs(meas.phi[c][i] - t.phi[c][i]) > tol)
        throw precondition_error("energy: field trace does not match phi");
}

} // namespace detail

inline EnergyReport bound_certificates(const ScalarField &u, const BoundaryCurve &curve,
                                       const BoundaryTrace &trace, double gamma,
                                       double match_tol = 0.05) {
  detail::require_trace_match(u, curve, trace, match_tol);
  const DiscreteDomain &d = *u.dom;
  EnergyReport r = willmore_energy(u, gamma);
  GeometryBundle b = geometry_bundle(u);
  BoundaryNorms nm = boundary_norms(trace, curve);
  double chi = curve.chi();
  double a2q = 0.0;
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d.cls[n] != NodeClass::exterior) a2q += d.weight[n] * b.A2.v[n] * b.Q.v[n];
  double tracebound = nm.phi_w21 + nm.kappa_l1;
  r.cert.kbound_lhs = std::abs(r.total_gauss);
  r.cert.kbound_rhs = tracebound + 2 * std::numbers::pi * std::abs(chi);
  r.cert.abound_lhs = a2q;
  r.cert.abound_rhs = 4 * r.W0 + 2 * tracebound - 4 * std::numbers::pi * chi;
  r.cert.gamma_gap_lhs = std::abs(r.W0 - r.Wgamma);
  r.cert.gamma_gap_rhs = std::abs(gamma) * r.cert.kbound_rhs;
  r.cert.ah_identity_gap = std::abs(a2q - (4 * r.W0 - 2 * r.total_gauss));
  r.cert.apriori_ratio = (r.sup_u + r.area) / (r.W0 * r.W0 + 1);
  r.has_cert = true;
  return r;
}

inline double apriori_ratio(const ScalarField &u, const BoundaryCurve &curve,
                            const BoundaryTrace &trace, double match_tol = 0.05) {
  detail::require_trace_match(u, curve, trace, match_tol);
  EnergyReport r = willmore_energy(u, 0.0);
  return (r.sup_u + r.area) / (r.W0 * r.W0 + 1);
}

// C^1 extension of the boundary values phi'' / (1 + phi'^2) into the domain:
// pull the value back along the ray through the domain center (the nearest
// point on circles) and fade it out with a smoothstep cutoff over a collar.
// Any such alpha is admissible; two different collar widths give a
// discretization-level independence check.
inline ScalarField build_alpha_extension(const DiscreteDomain &d, const BoundaryCurve &curve,
                                         const BoundaryTrace &trace, double collar_frac = 0.2) {
  if (collar_frac <= 0 || collar_frac > 0.45)
    throw config_error("alpha extension: collar fraction must lie in (0, 0.45]");
  constexpr double TAU = 2 * std::numbers::pi;
  // per component: boundary value and radius as periodic functions of the ray
  // angle, sampled and linearly interpolated
  struct Ray {
    std::vector<double> ang, val, rad;
    double eval(double th, bool want_rad) const {
      th = std::fmod(std::fmod(th - ang.front(), TAU) + TAU, TAU) + ang.front();
      auto it = std::upper_bound(ang.begin(), ang.end(), th);
      std::size_t k1 = it - ang.begin(), k0 = k1 - 1;
      double a0 = ang[k0], a1;
      const std::vector<double> &f = want_rad ? rad : val;
      double f0 = f[k0], f1;
      if (k1 == ang.size()) {
        a1 = ang.front() + TAU;
        f1 = f.front();
      } else {
        a1 = ang[k1];
        f1 = f[k1];
      }
      double t = (th - a0) / (a1 - a0);
      return (1 - t) * f0 + t * f1;
    }
  };
  std::vector<Ray> rays(curve.m());
  double inrad = 1e300, outrad = 0;
  for (int c = 0; c < curve.m(); ++c) {
    const auto &comp = curve.comps[c];
    std::vector<std::size_t> order(comp.size());
    std::vector<double> ang(comp.size());
    for (std::size_t k = 0; k < comp.size(); ++k) {
      ang[k] = std::fmod(std::atan2(comp.cy[k], comp.cx[k]) + TAU, TAU);
      order[k] = k;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ang[a] < ang[b]; });
    for (std::size_t k : order) {
      rays[c].ang.push_back(ang[k]);
      rays[c].val.push_back(trace.ddphi[c][k] / (1 + trace.dphi[c][k] * trace.dphi[c][k]));
      double rb = std::hypot(comp.cx[k], comp.cy[k]);
      rays[c].rad.push_back(rb);
      inrad = std::min(inrad, rb);
      outrad = std::max(outrad, rb);
    }
  }
  // collar width: fraction of the inradius (one component) or of the gap
  // between the two circles (annulus)
  double width = collar_frac * (curve.m() == 1 ? inrad : outrad - inrad);
  ScalarField alpha(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t n = d.idx(i, j);
      if (d.cls[n] == NodeClass::exterior) continue;
      double x = d.px(i, j), y = d.py(i, j);
      double th = std::atan2(y, x), rr = std::hypot(x, y);
      double acc = 0.0;
      for (int c = 0; c < curve.m(); ++c) {
        double rb = rays[c].eval(th, true);
        double dist = std::abs(rr - rb);
        double s = std::clamp((dist - width) / width, 0.0, 1.0);
        double cutoff = 1.0 - s * s * (3 - 2 * s); // C^1, = 1 in the collar
        if (cutoff > 0) acc += rays[c].eval(th, false) * cutoff;
      }
      alpha.v[n] = acc;
    }
  return alpha;
}

inline double gauss_energy_EG(const ScalarField &u, const BoundaryCurve &curve,
                              const BoundaryTrace &trace, const ScalarField &alpha,
                              double match_tol = 0.05) {
  const DiscreteDomain &d = *u.dom;
  // alpha must carry the trace phi''/(1+phi'^2)
  BoundaryTrace ameas = trace_from_field(alpha, curve);
  for (std::size_t c = 0; c < curve.comps.size(); ++c)
    for (std::size_t i = 0; i < curve.comps[c].size(); ++i) {
      double want = trace.ddphi[c][i] / (1 + trace.dphi[c][i] * trace.dphi[c][i]);
      if (std::abs(ameas.phi[c][i] - want) > match_tol)
        throw precondition_error("gauss_energy_EG: alpha trace mismatch");
    }
  GeometryBundle b = geometry_bundle(u);
  VectorField ga = gradient(alpha);
  double interior = 0.0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    interior += d.weight[n] * (b.H_div.v[n] * alpha.v[n] +
                               b.w.x.v[n] * ga.x.v[n] + b.w.y.v[n] * ga.y.v[n]);
  }
  double bdry = 0.0;
  for (std::size_t c = 0; c < curve.comps.size(); ++c) {
    const auto &comp = curve.comps[c];
    for (std::size_t i = 0; i < comp.size(); ++i) {
      double p1 = trace.dphi[c][i], un = trace.unu[c][i];
      double q = std::sqrt(1 + p1 * p1 + un * un);
      bdry += comp.kappa[i] / q * comp.ds(i);
    }
  }
  return 2 * std::numbers::pi * curve.chi() + interior - bdry;
}

// Willmore energy of the regular region of a field with flagged jump nodes:
// every node whose radius-2 stencil neighborhood touches a flag is excluded
// from the quadrature, so no differenced value crosses the jump.
inline double willmore_absolutely_continuous(const ScalarField &u,
                                             const std::vector<std::uint8_t> &jump_flag) {
  const DiscreteDomain &d = *u.dom;
  if (jump_flag.size() != d.size())
    throw precondition_error("willmore_absolutely_continuous: flag size mismatch");
  for (std::size_t n = 0; n < d.size(); ++n)
    if (jump_flag[n] && d.cls[n] == NodeClass::exterior)
      throw precondition_error("willmore_absolutely_continuous: flag on exterior node");
  GeometryBundle b = geometry_bundle(u);
  auto clear = [&](int i, int j) {
    for (int dj = -2; dj <= 2; ++dj)
      for (int di = -2; di <= 2; ++di) {
        int ii = i + di, jj = j + dj;
        if (d.mode == GridMode::polar) jj = (jj + d.ny) % d.ny;
        if (ii < 0 || ii >= d.nx || jj < 0 || jj >= d.ny) continue;
        if (jump_flag[d.idx(ii, jj)]) return false;
      }
    return true;
  };
  double acc = 0.0;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t n = d.idx(i, j);
      if (d.cls[n] == NodeClass::exterior || !clear(i, j)) continue;
      double q = b.Q.v[n], hd = b.H_div.v[n];
      acc += d.weight[n] * 0.25 * hd * hd * q;
    }
  return acc;
}

} // namespace willmore

#endif
