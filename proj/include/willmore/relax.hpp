#ifndef WILLMORE_RELAX_HPP
#define WILLMORE_RELAX_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "willmore/boundary.hpp"
#include "willmore/energy.hpp"
#include "willmore/errors.hpp"
#include "willmore/grid.hpp"

namespace willmore {

// Compactness machinery: for a graph with area element Q the fields
//   q = Q^{-5/2},  v = q grad u,  g = Q^{-3/2},  e = u g
// stay bounded in H^1 even when grad u blows up, and the regular part of the
// gradient is recovered as v/q wherever q stays away from zero.

struct AuxiliaryFields {
  const DiscreteDomain *dom = nullptr;
  ScalarField q, g, e;
  VectorField v;
  double q_h1 = 0, v_h1 = 0, g_h1 = 0, e_h1 = 0; // discrete H1 seminorms
  std::vector<std::uint8_t> zero_set;            // q <= tol
  double tol = 0;
  // largest ratio of |grad q| (resp. the row norm of Dv) to its analytic
  // pointwise bound (5/2)|D2u|/Q^{7/2} (resp. (7/2)|D2u|/Q^{5/2})
  double dq_bound_ratio = 0;
  double dv_bound_ratio = 0;
};

namespace detail {

inline double h1_seminorm(const ScalarField &f) {
  VectorField g = gradient(f);
  const DiscreteDomain &d = *f.dom;
  double acc = 0;
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d.cls[n] != NodeClass::exterior)
      acc += d.weight[n] * (g.x.v[n] * g.x.v[n] + g.y.v[n] * g.y.v[n]);
  return std::sqrt(acc);
}

} // namespace detail

inline AuxiliaryFields auxiliary_fields(const ScalarField &u) {
  if (!u.all_finite()) throw precondition_error("auxiliary_fields: field has non-finite nodes");
  const DiscreteDomain &d = *u.dom;
  AuxiliaryFields a;
  a.dom = &d;
  a.tol = d.h;
  a.q = ScalarField(d);
  a.g = ScalarField(d);
  a.e = ScalarField(d);
  a.v = VectorField(d);
  a.zero_set.assign(d.size(), 0);
  VectorField gr = gradient(u);
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    double Q = std::sqrt(1 + gr.x.v[n] * gr.x.v[n] + gr.y.v[n] * gr.y.v[n]);
    a.q.v[n] = std::pow(Q, -2.5);
    a.g.v[n] = std::pow(Q, -1.5);
    a.e.v[n] = u.v[n] * a.g.v[n];
    a.v.x.v[n] = a.q.v[n] * gr.x.v[n];
    a.v.y.v[n] = a.q.v[n] * gr.y.v[n];
    if (a.q.v[n] <= a.tol) a.zero_set[n] = 1;
  }
  a.q_h1 = detail::h1_seminorm(a.q);
  a.g_h1 = detail::h1_seminorm(a.g);
  a.e_h1 = detail::h1_seminorm(a.e);
  double vx = detail::h1_seminorm(a.v.x), vy = detail::h1_seminorm(a.v.y);
  a.v_h1 = std::sqrt(vx * vx + vy * vy);
  // pointwise derivative bounds: discrete gradients of the composed fields
  // against the chain-rule estimates, checked on interior nodes only
  VectorField dq = gradient(a.q);
  VectorField dvx = gradient(a.v.x), dvy = gradient(a.v.y);
  TensorField hs = hessian(u);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t n = d.idx(i, j);
      if (d.cls[n] != NodeClass::interior) continue;
      double Q = std::sqrt(1 + gr.x.v[n] * gr.x.v[n] + gr.y.v[n] * gr.y.v[n]);
      double F = std::sqrt(hs.xx.v[n] * hs.xx.v[n] + 2 * hs.xy.v[n] * hs.xy.v[n] +
                           hs.yy.v[n] * hs.yy.v[n]);
      double ndq = std::hypot(dq.x.v[n], dq.y.v[n]);
      double ndv = std::sqrt(dvx.x.v[n] * dvx.x.v[n] + dvx.y.v[n] * dvx.y.v[n] +
                             dvy.x.v[n] * dvy.x.v[n] + dvy.y.v[n] * dvy.y.v[n]);
      double bq = 2.5 * F / std::pow(Q, 3.5);
      double bv = 3.5 * F / std::pow(Q, 2.5);
      a.dq_bound_ratio = std::max(a.dq_bound_ratio, ndq / (bq + 1e-30));
      a.dv_bound_ratio = std::max(a.dv_bound_ratio, ndv / (bv + 1e-30));
    }
  return a;
}

struct RegularGradient {
  VectorField grad_a; // v/q where defined, 0 elsewhere
  ScalarField Qa;
  std::vector<std::uint8_t> defined; // q > tol
  double defined_fraction = 0;
  bool degenerate_warning = false; // more than half the nodes undefined
};

inline RegularGradient reconstruct_regular_gradient(const AuxiliaryFields &a) {
  const DiscreteDomain &d = *a.dom;
  RegularGradient r;
  r.grad_a = VectorField(d);
  r.Qa = ScalarField(d);
  r.defined.assign(d.size(), 0);
  std::size_t active = 0, ok = 0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    ++active;
    if (a.q.v[n] > a.tol) {
      r.defined[n] = 1;
      ++ok;
      r.grad_a.x.v[n] = a.v.x.v[n] / a.q.v[n];
      r.grad_a.y.v[n] = a.v.y.v[n] / a.q.v[n];
      r.Qa.v[n] = std::sqrt(1 + r.grad_a.x.v[n] * r.grad_a.x.v[n] +
                            r.grad_a.y.v[n] * r.grad_a.y.v[n]);
    }
  }
  r.defined_fraction = active ? double(ok) / double(active) : 0.0;
  r.degenerate_warning = r.defined_fraction < 0.5;
  return r;
}

struct SequenceRow {
  double w0 = 0, wgamma = 0;
  double l1_dist = 0;
  double q_h1 = 0, v_h1 = 0, g_h1 = 0, e_h1 = 0;
  double q_inv_integral = 0; // int q^{-2/5} dx, equals the area int Q dx
  double area = 0;
};

inline std::vector<SequenceRow> sequence_diagnostics(const std::vector<ScalarField> &seq,
                                                     const ScalarField &limit,
                                                     double gamma = 0.0) {
  const DiscreteDomain &d = *limit.dom;
  std::vector<SequenceRow> rows;
  rows.reserve(seq.size());
  for (const ScalarField &u : seq) {
    if (u.dom != limit.dom)
      throw precondition_error("sequence_diagnostics: mixed domains in sequence");
    SequenceRow row;
    EnergyReport er = willmore_energy(u, gamma);
    row.w0 = er.W0;
    row.wgamma = er.Wgamma;
    row.area = er.area;
    ScalarField diff(d);
    for (std::size_t n = 0; n < d.size(); ++n) diff.v[n] = std::abs(u.v[n] - limit.v[n]);
    row.l1_dist = integrate(diff);
    AuxiliaryFields a = auxiliary_fields(u);
    row.q_h1 = a.q_h1;
    row.v_h1 = a.v_h1;
    row.g_h1 = a.g_h1;
    row.e_h1 = a.e_h1;
    for (std::size_t n = 0; n < d.size(); ++n)
      if (d.cls[n] != NodeClass::exterior)
        row.q_inv_integral += d.weight[n] * std::pow(a.q.v[n], -0.4);
    rows.push_back(row);
  }
  return rows;
}

struct LscReport {
  double liminf_w0 = 0; // min over the final third of the sequence
  double wa_limit = 0;
  double margin = 0; // liminf_w0 - wa_limit
  std::vector<double> l1_dist;
};

// Lower-semicontinuity surrogate: a finite sequence cannot realize a liminf,
// so the minimum over its final third stands in for it. The sequence must be
// L1-convergent to the limit; singular_flags masks the part of the limit the
// absolutely continuous energy must not see.
inline LscReport lsc_check(const std::vector<ScalarField> &seq, const ScalarField &limit,
                           const std::vector<std::uint8_t> &singular_flags = {},
                           double conv_tol = 0.1) {
  if (seq.empty()) throw precondition_error("lsc_check: empty sequence");
  const DiscreteDomain &d = *limit.dom;
  LscReport rep;
  for (const ScalarField &u : seq) {
    if (u.dom != limit.dom) throw precondition_error("lsc_check: mixed domains in sequence");
    ScalarField diff(d);
    for (std::size_t n = 0; n < d.size(); ++n) diff.v[n] = std::abs(u.v[n] - limit.v[n]);
    rep.l1_dist.push_back(integrate(diff));
  }
  for (std::size_t m = 0; m + 1 < rep.l1_dist.size(); ++m)
    if (rep.l1_dist[m + 1] > rep.l1_dist[m] + 1e-12)
      throw precondition_error("lsc_check: L1 distances not decreasing");
  if (rep.l1_dist.back() > conv_tol)
    throw precondition_error("lsc_check: sequence not L1-convergent within tolerance");
  std::size_t tail = (seq.size() + 2) / 3;
  double mn = 1e300;
  for (std::size_t m = seq.size() - tail; m < seq.size(); ++m)
    mn = std::min(mn, willmore_energy(seq[m], 0.0).W0);
  rep.liminf_w0 = mn;
  std::vector<std::uint8_t> flags =
      singular_flags.empty() ? std::vector<std::uint8_t>(d.size(), 0) : singular_flags;
  rep.wa_limit = willmore_absolutely_continuous(limit, flags);
  rep.margin = rep.liminf_w0 - rep.wa_limit;
  return rep;
}

struct TraceAttainmentRow {
  double s = 0;        // arclength of the boundary sample
  double u_err = 0;    // |trace of the limit - phi|
  double unu_err = 0;  // |normal derivative - given|, Dirichlet mode
  bool regular = true; // g stays above tol approaching this sample
};

struct TraceAttainmentReport {
  std::vector<std::vector<TraceAttainmentRow>> comps;
  double max_u_err_regular = 0, max_unu_err_regular = 0;
  double irregular_fraction = 0;
  double max_seq_trace_dev = 0; // sequence traces against the limit's
};

inline TraceAttainmentReport boundary_trace_check(const std::vector<ScalarField> &seq,
                                                  const ScalarField &limit,
                                                  const BoundaryCurve &curve,
                                                  const BoundaryTrace &phi, bool dirichlet) {
  const DiscreteDomain &d = *limit.dom;
  AuxiliaryFields aux = auxiliary_fields(limit);
  BoundaryTrace lim_tr = trace_from_field(limit, curve);
  TraceAttainmentReport rep;
  for (const ScalarField &u : seq) {
    BoundaryTrace tr = trace_from_field(u, curve);
    for (std::size_t c = 0; c < curve.comps.size(); ++c)
      for (std::size_t i = 0; i < tr.phi[c].size(); ++i)
        rep.max_seq_trace_dev =
            std::max(rep.max_seq_trace_dev, std::abs(tr.phi[c][i] - lim_tr.phi[c][i]));
  }
  std::size_t total = 0, irregular = 0;
  for (std::size_t c = 0; c < curve.comps.size(); ++c) {
    const BoundaryComponent &bc = curve.comps[c];
    std::vector<TraceAttainmentRow> rows(bc.s.size());
    for (std::size_t i = 0; i < bc.s.size(); ++i) {
      TraceAttainmentRow &row = rows[i];
      row.s = bc.s[i];
      row.u_err = std::abs(lim_tr.phi[c][i] - phi.phi[c][i]);
      if (dirichlet) row.unu_err = std::abs(lim_tr.unu[c][i] - phi.unu[c][i]);
      // g sampled a couple of cells inside: vertical approach to the boundary
      // drives g to zero there and voids the attainment guarantee
      double gx = bc.cx[i] - 2.5 * d.h * bc.nx[i], gy = bc.cy[i] - 2.5 * d.h * bc.ny[i];
      row.regular = interpolate(aux.g, gx, gy) > aux.tol;
      ++total;
      if (!row.regular) {
        ++irregular;
        continue;
      }
      rep.max_u_err_regular = std::max(rep.max_u_err_regular, row.u_err);
      rep.max_unu_err_regular = std::max(rep.max_unu_err_regular, row.unu_err);
    }
    rep.comps.push_back(std::move(rows));
  }
  rep.irregular_fraction = total ? double(irregular) / double(total) : 0.0;
  return rep;
}

} // namespace willmore

#endif
