#ifndef WILLMORE_GRAPHGEOM_HPP
#define WILLMORE_GRAPHGEOM_HPP

#include <cmath>
#include <cstddef>

#include "willmore/errors.hpp"
#include "willmore/grid.hpp"

namespace willmore {

// Pointwise geometry of graph(u). H is the sum of the principal curvatures,
// K their product. Two discretizations of each are kept: the non-divergence
// H and det(D2u)/Q^4 are local in D2u, while the divergence form div(w) and
// det(Dw) difference the field w = grad(u)/Q a second time. Their mismatch
// is a direct measure of discretization error.
struct GeometryBundle {
  const DiscreteDomain *dom = nullptr;
  ScalarField Q;        // area element sqrt(1+|grad u|^2)
  VectorField w;        // grad(u)/Q
  ScalarField H;        // (1/Q)(id - w (x) w) : D2u
  ScalarField H_div;    // div(w)
  ScalarField K;        // det(D2u)/Q^4
  ScalarField K_dw;     // det(Dw)
  ScalarField A2;       // |A|^2_g = trace(gInv A gInv A), A = D2u/Q
  TensorField gInv;     // id - w (x) w
  TensorField secondForm; // D2u/Q
  VectorField grad;
  TensorField hess;
  double h_discrepancy = 0.0; // max |H - H_div| over interior nodes
  double k_discrepancy = 0.0; // max |K - K_dw| over interior nodes
};

inline GeometryBundle geometry_bundle(const ScalarField &u) {
  const DiscreteDomain &d = *u.dom;
  if (!u.all_finite()) throw precondition_error("geometry_bundle: non-finite input field");
  GeometryBundle b;
  b.dom = &d;
  b.grad = gradient(u);
  b.hess = hessian(u);
  b.Q = ScalarField(d);
  b.w = VectorField(d);
  b.H = ScalarField(d);
  b.K = ScalarField(d);
  b.K_dw = ScalarField(d);
  b.A2 = ScalarField(d);
  b.gInv = TensorField(d);
  b.secondForm = TensorField(d);
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    double ux = b.grad.x.v[n], uy = b.grad.y.v[n];
    double q = std::sqrt(1.0 + ux * ux + uy * uy);
    double wx = ux / q, wy = uy / q;
    double uxx = b.hess.xx.v[n], uxy = b.hess.xy.v[n], uyy = b.hess.yy.v[n];
    b.Q.v[n] = q;
    b.w.x.v[n] = wx;
    b.w.y.v[n] = wy;
    b.gInv.xx.v[n] = 1.0 - wx * wx;
    b.gInv.xy.v[n] = -wx * wy;
    b.gInv.yy.v[n] = 1.0 - wy * wy;
    b.secondForm.xx.v[n] = uxx / q;
    b.secondForm.xy.v[n] = uxy / q;
    b.secondForm.yy.v[n] = uyy / q;
    b.H.v[n] =
        ((1.0 - wx * wx) * uxx - 2.0 * wx * wy * uxy + (1.0 - wy * wy) * uyy) / q;
    b.K.v[n] = (uxx * uyy - uxy * uxy) / (q * q * q * q);
    // shape operator S = gInv * secondForm; |A|^2_g = trace(S^2)
    double s11 = b.gInv.xx.v[n] * b.secondForm.xx.v[n] + b.gInv.xy.v[n] * b.secondForm.xy.v[n];
    double s12 = b.gInv.xx.v[n] * b.secondForm.xy.v[n] + b.gInv.xy.v[n] * b.secondForm.yy.v[n];
    double s21 = b.gInv.xy.v[n] * b.secondForm.xx.v[n] + b.gInv.yy.v[n] * b.secondForm.xy.v[n];
    double s22 = b.gInv.xy.v[n] * b.secondForm.xy.v[n] + b.gInv.yy.v[n] * b.secondForm.yy.v[n];
    b.A2.v[n] = s11 * s11 + 2.0 * s12 * s21 + s22 * s22;
  }
  b.H_div = divergence(b.w);
  VectorField dwx = gradient(b.w.x);
  VectorField dwy = gradient(b.w.y);
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    b.K_dw.v[n] = dwx.x.v[n] * dwy.y.v[n] - dwx.y.v[n] * dwy.x.v[n];
    if (d.cls[n] == NodeClass::interior) {
      b.h_discrepancy = std::max(b.h_discrepancy, std::abs(b.H.v[n] - b.H_div.v[n]));
      b.k_discrepancy = std::max(b.k_discrepancy, std::abs(b.K.v[n] - b.K_dw.v[n]));
    }
  }
  return b;
}

// Per-node chain (1/Q^2)|D2u|^2 >= |A|^2_g >= (1/Q^6)|D2u|^2; the three
// values are recorded so callers can plot margins.
struct HessianBoundReport {
  ScalarField upper;   // |D2u|^2 / Q^2
  ScalarField middle;  // |A|^2_g
  ScalarField lower;   // |D2u|^2 / Q^6
  int upper_violations = 0; // nodes with upper < middle - tol
  int lower_violations = 0; // nodes with middle < lower - tol
  double max_upper_violation = 0.0; // max relative excess of middle over upper
  double max_lower_violation = 0.0;
  double tol = 0.0;
};

inline HessianBoundReport hessian_bound_check(const ScalarField &u) {
  const DiscreteDomain &d = *u.dom;
  GeometryBundle b = geometry_bundle(u);
  HessianBoundReport r;
  r.upper = ScalarField(d);
  r.middle = ScalarField(d);
  r.lower = ScalarField(d);
  r.tol = 10.0 * d.h * d.h;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    double uxx = b.hess.xx.v[n], uxy = b.hess.xy.v[n], uyy = b.hess.yy.v[n];
    double frob2 = uxx * uxx + 2.0 * uxy * uxy + uyy * uyy;
    double q2 = b.Q.v[n] * b.Q.v[n];
    double up = frob2 / q2;
    double lo = frob2 / (q2 * q2 * q2);
    double mid = b.A2.v[n];
    r.upper.v[n] = up;
    r.middle.v[n] = mid;
    r.lower.v[n] = lo;
    double scale = std::max(1.0, std::abs(up));
    if (mid > up + r.tol * scale) {
      ++r.upper_violations;
      r.max_upper_violation = std::max(r.max_upper_violation, (mid - up) / scale);
    }
    if (lo > mid + r.tol * scale) {
      ++r.lower_violations;
      r.max_lower_violation = std::max(r.max_lower_violation, (lo - mid) / scale);
    }
  }
  return r;
}

} // namespace willmore

#endif
