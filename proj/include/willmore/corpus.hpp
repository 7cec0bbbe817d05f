#ifndef WILLMORE_CORPUS_HPP
#define WILLMORE_CORPUS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "willmore/energy.hpp"
#include "willmore/errors.hpp"
#include "willmore/graphgeom.hpp"
#include "willmore/grid.hpp"

namespace willmore {

// Singular model fields:
//  - logloglinear: u = x1 log(-log r) near 0, vanishing energy under scaling
//    while the gradient stays unbounded,
//  - radial_k:     u = sgn(1-r)|1-r|^{1/k} on the disk of radius 2, finite
//    energy but u outside W^{1,k/(k-1)},
//  - radial_k_cylinder: radial_k with a vertical jump of height J inserted at
//    r = 1, the BV-but-not-W^{1,1} configuration,
//  - sqrtlog:      u = x1 (-log r)^{1/2}, finite Willmore energy with
//    log log-divergent Hessian.
enum class ExampleId { logloglinear, radial_k, radial_k_cylinder, sqrtlog };

struct ExampleParams {
  double eps = 1.0;  // amplitude scale (logloglinear)
  int k = 3;         // radial exponent, odd and >= 3
  double jump = 1.0; // cylinder height (radial_k_cylinder)
};

struct ExampleField {
  ExampleId id{};
  ExampleParams p;
  double domain_radius = 1.0;
  bool point_singularity = true; // false: singular circle at r = 1
  bool has_derivatives = false;
  std::function<double(double, double)> value;
  std::function<std::array<double, 2>(double, double)> grad;   // ux, uy
  std::function<std::array<double, 3>(double, double)> hess;   // uxx, uxy, uyy
  std::function<double(double)> radial;                        // profile h(r), radial examples

  ScalarField sample(const DiscreteDomain &d) const { return ScalarField(d, value); }
};

namespace detail {

// quintic smoothstep: 0 -> 1 on [0, 1] with two vanishing derivatives at ends
inline double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10 + t * (-15 + 6 * t));
}
inline double smoothstep5_d(double t) {
  if (t <= 0 || t >= 1) return 0;
  return t * t * (30 + t * (-60 + 30 * t));
}
inline double smoothstep5_dd(double t) {
  if (t <= 0 || t >= 1) return 0;
  return t * (60 + t * (-180 + 120 * t));
}

// cutoff used to glue the singular profiles to zero: 1 for r <= a, 0 for
// r >= b, quintic in between; the pure zone reaches past r = 1/e so the
// model formulas hold unmodified there
constexpr double GLUE_A = 0.4, GLUE_B = 0.8;
inline void glue_cutoff(double r, double &w, double &dw, double &ddw) {
  double span = GLUE_B - GLUE_A, t = (r - GLUE_A) / span;
  w = 1 - smoothstep5(t);
  dw = -smoothstep5_d(t) / span;
  ddw = -smoothstep5_dd(t) / (span * span);
}

} // namespace detail

inline ExampleField build_example(ExampleId id, const ExampleParams &p = {}) {
  if ((id == ExampleId::radial_k || id == ExampleId::radial_k_cylinder) &&
      (p.k < 3 || p.k % 2 == 0))
    throw config_error("example: radial exponent k must be odd and >= 3");
  if (id == ExampleId::radial_k_cylinder && p.jump < 0)
    throw config_error("example: jump height must be nonnegative");
  ExampleField f;
  f.id = id;
  f.p = p;
  switch (id) {
  case ExampleId::logloglinear: {
    f.domain_radius = 1.0;
    double eps = p.eps;
    f.value = [eps](double x, double y) {
      double r = std::hypot(x, y);
      if (r < 1e-9 || r >= detail::GLUE_B) return 0.0;
      double w, dw, ddw;
      detail::glue_cutoff(r, w, dw, ddw);
      return eps * x * w * std::log(-std::log(r));
    };
    break;
  }
  case ExampleId::sqrtlog: {
    f.domain_radius = 1.0;
    f.has_derivatives = true;
    // u = x1 G(r), G = w(r) (-log r)^{1/2}; the partials follow the radial
    // framework u_1 = G + x1^2 G'/r, u_ij built from G', G''
    auto G3 = [](double r) -> std::array<double, 3> {
      double w, dw, ddw;
      detail::glue_cutoff(r, w, dw, ddw);
      double L = -std::log(r), S = std::sqrt(L);
      double G = w * S;
      double Gp = dw * S - w / (2 * r * S);
      double Gpp = ddw * S - dw / (r * S) + w / (2 * r * r * S) - w / (4 * r * r * S * S * S);
      return {G, Gp, Gpp};
    };
    f.value = [G3](double x, double y) {
      double r = std::hypot(x, y);
      if (r < 1e-9 || r >= detail::GLUE_B) return 0.0;
      return x * G3(r)[0];
    };
    f.grad = [G3](double x, double y) -> std::array<double, 2> {
      double r = std::hypot(x, y);
      if (r < 1e-9 || r >= detail::GLUE_B) return {0.0, 0.0};
      auto [G, Gp, Gpp] = G3(r);
      (void)Gpp;
      return {G + x * x * Gp / r, x * y * Gp / r};
    };
    f.hess = [G3](double x, double y) -> std::array<double, 3> {
      double r = std::hypot(x, y);
      if (r < 1e-9 || r >= detail::GLUE_B) return {0.0, 0.0, 0.0};
      auto [G, Gp, Gpp] = G3(r);
      (void)G;
      double c = Gpp / (r * r) - Gp / (r * r * r);
      return {3 * x * Gp / r + x * x * x * c, y * Gp / r + x * x * y * c,
              x * Gp / r + x * y * y * c};
    };
    break;
  }
  case ExampleId::radial_k:
  case ExampleId::radial_k_cylinder: {
    f.domain_radius = 2.0;
    f.point_singularity = false;
    int k = p.k;
    double J = (id == ExampleId::radial_k_cylinder) ? p.jump : 0.0;
    f.radial = [k, J](double r) {
      if (r < 1.0) return std::pow(1.0 - r, 1.0 / k) + J;
      if (r > 1.0) return -std::pow(r - 1.0, 1.0 / k);
      return 0.0; // on the jump circle itself: bottom of the segment
    };
    auto h = f.radial;
    f.value = [h](double x, double y) { return h(std::hypot(x, y)); };
    break;
  }
  }
  return f;
}

struct DivergenceRow {
  double delta = 0;
  double grad_p = 0; // int |grad u|^p off the singular set
  double hess2 = 0;  // int |D2u|^2
  double w0 = 0;     // (1/4) int H^2 Q
};

// Integrals over the domain minus a shrinking neighborhood of the singular
// set: a ball of radius delta around the origin (point singularities) or the
// collar |r - 1| < delta (circle singularities).
inline std::vector<DivergenceRow>
divergence_diagnostics(const ExampleField &ex, const ScalarField &u,
                       const std::vector<double> &deltas, double p) {
  const DiscreteDomain &d = *u.dom;
  for (std::size_t m = 0; m + 1 < deltas.size(); ++m)
    if (deltas[m + 1] >= deltas[m])
      throw precondition_error("divergence_diagnostics: delta schedule must decrease");
  for (double del : deltas)
    if (del < 4 * d.h)
      throw resolution_error("divergence_diagnostics: delta below 4 h");
  GeometryBundle b = geometry_bundle(u);
  std::vector<DivergenceRow> rows;
  for (double del : deltas) {
    DivergenceRow row;
    row.delta = del;
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        std::size_t n = d.idx(i, j);
        if (d.cls[n] == NodeClass::exterior) continue;
        double r = std::hypot(d.px(i, j), d.py(i, j));
        if (ex.point_singularity ? (r < del) : (std::abs(r - 1.0) < del)) continue;
        double w = d.weight[n];
        double gx = b.grad.x.v[n], gy = b.grad.y.v[n];
        double uxx = b.hess.xx.v[n], uxy = b.hess.xy.v[n], uyy = b.hess.yy.v[n];
        row.grad_p += w * std::pow(gx * gx + gy * gy, p / 2);
        row.hess2 += w * (uxx * uxx + 2 * uxy * uxy + uyy * uyy);
        row.w0 += w * 0.25 * b.H_div.v[n] * b.H_div.v[n] * b.Q.v[n];
      }
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

// inverse profile of the radial examples: radius as a function of height z.
// Going down the graph: z in [J, J+1] descends the inner branch, [0, J] the
// inserted cylinder, [-1, 0] the outer branch. C^2 for k >= 3.
inline double inverse_profile(double z, int k, double J) {
  if (z >= J) return 1.0 - std::pow(z - J, k);
  if (z >= 0.0) return 1.0;
  return 1.0 + std::pow(-z, k);
}

// height of the perturbed, strictly monotone curve rho(z) - sigma z = r
inline double mollified_height(double r, int k, double J, double sigma) {
  double lo = -3.0, hi = J + 3.0; // f(lo) > 0 > f(hi) for all r in [0, 2]
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double fr = inverse_profile(mid, k, J) - sigma * mid - r;
    (fr > 0 ? lo : hi) = mid;
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

} // namespace detail

// Smooth approximations of the radial examples: the profile curve, not the
// height function, is mollified. The inverse profile rho(z) is tilted by
// -sigma_j z, which caps the slope at 1/sigma_j while keeping the curve C^2;
// the result is blended back to the exact profile away from r = 1 so the
// boundary data never changes. sigma_j = sigma0 2^{-j}.
inline ScalarField mollified_sequence(const ExampleField &ex, const DiscreteDomain &d, int j,
                                      double sigma0 = 0.5) {
  if (ex.id != ExampleId::radial_k && ex.id != ExampleId::radial_k_cylinder)
    throw precondition_error("mollified_sequence: only radial examples are mollified");
  if (j < 1) throw precondition_error("mollified_sequence: index must be >= 1");
  double sigma = sigma0 * std::pow(2.0, -j);
  if (sigma < 4 * d.h) throw resolution_error("mollified_sequence: sigma below 4 h");
  int k = ex.p.k;
  double J = (ex.id == ExampleId::radial_k_cylinder) ? ex.p.jump : 0.0;
  auto prof = [&](double r) { return detail::mollified_height(r, k, J, sigma); };
  // blend zones [0.5, 0.65] and [1.35, 1.5]: the tilted curve differs from
  // the exact profile by O(sigma) there; the quintic ramp removes even that,
  // so traces at r = 2 match the target bitwise
  auto blended = [&](double r) {
    double w;
    if (r >= 0.65 && r <= 1.35) w = 1.0;
    else if (r > 1.35) w = 1.0 - detail::smoothstep5((r - 1.35) / 0.15);
    else w = 1.0 - detail::smoothstep5((0.65 - r) / 0.15);
    if (w <= 0.0) return ex.radial(r);
    if (w >= 1.0) return prof(r);
    return w * prof(r) + (1 - w) * ex.radial(r);
  };
  return ScalarField(d, [&](double x, double y) { return blended(std::hypot(x, y)); });
}

// nodes within `band` of the singular circle r = 1, for the absolutely
// continuous energy of the limit field
inline std::vector<std::uint8_t> jump_circle_flags(const DiscreteDomain &d, double band) {
  std::vector<std::uint8_t> flags(d.size(), 0);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t n = d.idx(i, j);
      if (d.cls[n] == NodeClass::exterior) continue;
      if (std::abs(std::hypot(d.px(i, j), d.py(i, j)) - 1.0) < band) flags[n] = 1;
    }
  return flags;
}

} // namespace willmore

#endif
