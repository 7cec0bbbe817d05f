#ifndef WILLMORE_MINIMIZE_HPP
#define WILLMORE_MINIMIZE_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "willmore/boundary.hpp"
#include "willmore/energy.hpp"
#include "willmore/errors.hpp"
#include "willmore/graphgeom.hpp"
#include "willmore/grid.hpp"

namespace willmore {

enum class ConstraintMode { dirichlet, navier };
enum class InitField { phi_extension, zero, custom };

struct MinimizeConfig {
  ConstraintMode mode = ConstraintMode::dirichlet;
  double gamma = 0.0, alpha = 0.0, H0 = 0.0;
  InitField init = InitField::phi_extension;
  ScalarField custom_init; // used when init == custom
  // planar extension of the boundary data; its trace is phi and, in Dirichlet
  // mode, its values on the first interior layer fix the normal derivative
  std::function<double(double, double)> phi = [](double, double) { return 0.0; };
  int max_iters = 500;
  double step_init = 1e-2, backtrack = 0.5, armijo = 1e-4, step_max = 4.0;
  double tol_grad = 1e-8, tol_energy = 1e-13;
  double q_floor = 1.0; // Q >= 1 holds analytically; recorded, never applied
};

namespace detail {

inline void validate_config(const MinimizeConfig &cfg) {
  if (cfg.backtrack <= 0 || cfg.backtrack >= 1)
    throw config_error("minimize: backtracking factor must lie in (0,1)");
  if (cfg.tol_grad <= 0 || cfg.tol_energy <= 0)
    throw config_error("minimize: tolerances must be positive");
  if (cfg.step_init <= 0 || cfg.armijo <= 0 || cfg.max_iters < 1)
    throw config_error("minimize: step parameters must be positive");
}

} // namespace detail

// Free nodal values under the constraint mode: the outermost active layer
// carries the trace in both modes; Dirichlet additionally pins the first
// interior layer, the discrete normal-derivative condition.
inline std::vector<std::uint8_t> free_node_mask(const DiscreteDomain &d, ConstraintMode mode) {
  std::vector<std::uint8_t> mask(d.size(), 0);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      if (d.cls[d.idx(i, j)] == NodeClass::interior) mask[d.idx(i, j)] = 1;
  if (mode == ConstraintMode::dirichlet) {
    std::vector<std::uint8_t> out = mask;
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        if (!mask[d.idx(i, j)]) continue;
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            int ii = i + di, jj = j + dj;
            if (d.mode == GridMode::polar) jj = (jj % d.ny + d.ny) % d.ny;
            bool inside = ii >= 0 && ii < d.nx && jj >= 0 && jj < d.ny;
            // radial ends of a polar grid border the boundary only outward;
            // the inner end is either the origin or the excision rim
            if (!inside) {
              if (d.mode == GridMode::polar && ii < 0) continue;
              out[d.idx(i, j)] = 0;
              continue;
            }
            if (d.cls[d.idx(ii, jj)] != NodeClass::interior) out[d.idx(i, j)] = 0;
          }
      }
    return out;
  }
  return mask;
}

namespace detail {

struct EnergyWork {
  VectorField w;
  ScalarField Q, dens;
};

// pointwise energy density: (1/4)(H - H0)^2 Q - gamma K Q + alpha Q with the
// divergence-form H, matching the accumulation of willmore_energy / helfrich
inline double energy_density_at(const DiscreteDomain &d, const ScalarField &u,
                                const VectorField &w, const ScalarField &Q, int i, int j,
                                const MinimizeConfig &cfg) {
  std::size_t n = d.idx(i, j);
  double q = Q.v[n];
  double hd = divergence_at(d, w, i, j);
  double hxx, hxy, hyy;
  hessian_at(d, u, i, j, hxx, hxy, hyy);
  double bend = hd - cfg.H0;
  double val = 0.25 * bend * bend * q - cfg.gamma * (hxx * hyy - hxy * hxy) / (q * q * q);
  if (cfg.alpha != 0) val += cfg.alpha * q;
  return val;
}

inline void build_energy_work(const ScalarField &u, const MinimizeConfig &cfg, EnergyWork &wk) {
  const DiscreteDomain &d = *u.dom;
  wk.w = VectorField(d);
  wk.Q = ScalarField(d);
  wk.dens = ScalarField(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t n = d.idx(i, j);
      if (d.cls[n] == NodeClass::exterior) continue;
      double gx, gy;
      gradient_at(d, u, i, j, gx, gy);
      double q = std::sqrt(1 + gx * gx + gy * gy);
      wk.Q.v[n] = q;
      wk.w.x.v[n] = gx / q;
      wk.w.y.v[n] = gy / q;
    }
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      if (d.cls[d.idx(i, j)] != NodeClass::exterior)
        wk.dens.v[d.idx(i, j)] = energy_density_at(d, u, wk.w, wk.Q, i, j, cfg);
}

struct WindowNode {
  int i, j;
  std::size_t n;
};

// active nodes in a Chebyshev window; theta wraps on polar grids, and near
// the origin of a full disk the across-origin ghosts couple in the opposite
// rays, so a mirror block is appended there
class WindowCollector {
public:
  explicit WindowCollector(const DiscreteDomain &d) : d_(d), stamp_(d.size(), 0) {}

  void collect(int i0, int j0, int ri, int rj, std::vector<WindowNode> &out) {
    ++epoch_;
    out.clear();
    block(i0 - ri, i0 + ri, j0, rj, out);
    if (d_.mode == GridMode::polar && d_.shape == ShapeKind::disk &&
        d_.excision_radius <= 0 && i0 <= ri + 3)
      block(0, ri + 3, j0 + d_.ny / 2, rj + 2, out);
  }

private:
  void block(int ilo, int ihi, int jc, int rj, std::vector<WindowNode> &out) {
    for (int dj = -rj; dj <= rj; ++dj)
      for (int i = std::max(ilo, 0); i <= std::min(ihi, d_.nx - 1); ++i) {
        int j = jc + dj;
        if (d_.mode == GridMode::polar) j = (j % d_.ny + d_.ny) % d_.ny;
        if (j < 0 || j >= d_.ny) continue;
        std::size_t n = d_.idx(i, j);
        if (d_.cls[n] == NodeClass::exterior || stamp_[n] == epoch_) continue;
        stamp_[n] = epoch_;
        out.push_back({i, j, n});
      }
  }

  const DiscreteDomain &d_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

// true when every stencil touching the density window of (i0, j0) is the
// centered interior one, allowing the tight recomputation windows
inline bool deep_node(const DiscreteDomain &d, int i0, int j0) {
  if (d.mode == GridMode::polar) return i0 >= 10 && i0 + 10 < d.nx;
  for (int dj = -7; dj <= 7; ++dj)
    for (int di = -7; di <= 7; ++di) {
      int i = i0 + di, j = j0 + dj;
      if (i < 0 || i >= d.nx || j < 0 || j >= d.ny) return false;
      if (d.cls[d.idx(i, j)] == NodeClass::exterior) return false;
    }
  return true;
}

} // namespace detail

// the discrete objective the descent minimizes; equals Wgamma (resp. the
// Helfrich value) of the energy module up to summation order
inline double discrete_energy(const ScalarField &u, const MinimizeConfig &cfg) {
  detail::EnergyWork wk;
  detail::build_energy_work(u, cfg, wk);
  const DiscreteDomain &d = *u.dom;
  double acc = 0;
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d.cls[n] != NodeClass::exterior) acc += d.weight[n] * wk.dens.v[n];
  return acc;
}

// Central-difference gradient of the discrete energy with respect to the free
// nodal values. Each perturbation only touches the stencils through a bounded
// window, so the energy difference is accumulated locally. Central differences
// keep the noise floor low enough for the descent to resolve gradient norms
// several orders below the one-sided truncation bias.
inline ScalarField discrete_energy_gradient(const ScalarField &u, const MinimizeConfig &cfg) {
  detail::validate_config(cfg);
  const DiscreteDomain &d = *u.dom;
  if (!u.all_finite())
    throw precondition_error("discrete_energy_gradient: non-finite input field");
  std::vector<std::uint8_t> free = free_node_mask(d, cfg.mode);
  double scale = 0;
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d.cls[n] != NodeClass::exterior) scale = std::max(scale, std::abs(u.v[n]));
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t n = d.idx(i, j);
      if (d.cls[n] == NodeClass::exterior || free[n]) continue;
      if (std::abs(u.v[n] - cfg.phi(d.px(i, j), d.py(i, j))) > 1e-8 * std::max(1.0, scale))
        throw precondition_error("discrete_energy_gradient: field violates the constraints");
    }
  detail::EnergyWork wk;
  ScalarField uc = u;
  detail::build_energy_work(uc, cfg, wk);
  ScalarField g(d);
  detail::WindowCollector coll(d);
  std::vector<detail::WindowNode> wwin, dwin;
  // perturbation at the cube root of machine precision on the scale of a
  // nodal cell: the gradient entries themselves carry a quadrature weight
  double wbar = 0;
  std::size_t active = 0;
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d.cls[n] != NodeClass::exterior) {
      wbar += d.weight[n];
      ++active;
    }
  wbar /= double(active);
  double eps0 = std::cbrt(DBL_EPSILON) * wbar;
  std::vector<double> sw, swx, swy;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t n = d.idx(i, j);
      if (!free[n]) continue;
      bool deep = detail::deep_node(d, i, j);
      int rwi, rwj, rdi, rdj;
      if (d.mode == GridMode::polar) {
        rwi = deep ? 2 : 3;
        rwj = deep ? 2 : 2;
        rdi = deep ? 4 : 7;
        rdj = deep ? 4 : 6;
      } else {
        rwi = rwj = deep ? 1 : 2;
        rdi = rdj = deep ? 2 : 4;
      }
      coll.collect(i, j, rwi, rwj, wwin);
      coll.collect(i, j, rdi, rdj, dwin);
      double eps = eps0 * std::max(1.0, std::abs(uc.v[n]));
      double saved = uc.v[n];
      sw.clear();
      swx.clear();
      swy.clear();
      for (const auto &p : wwin) {
        sw.push_back(wk.Q.v[p.n]);
        swx.push_back(wk.w.x.v[p.n]);
        swy.push_back(wk.w.y.v[p.n]);
      }
      double side[2];
      for (int s = 0; s < 2; ++s) {
        uc.v[n] = s == 0 ? saved + eps : saved - eps;
        for (const auto &p : wwin) {
          double gx, gy;
          gradient_at(d, uc, p.i, p.j, gx, gy);
          double q = std::sqrt(1 + gx * gx + gy * gy);
          wk.Q.v[p.n] = q;
          wk.w.x.v[p.n] = gx / q;
          wk.w.y.v[p.n] = gy / q;
        }
        double acc = 0;
        for (const auto &p : dwin)
          acc += d.weight[p.n] * detail::energy_density_at(d, uc, wk.w, wk.Q, p.i, p.j, cfg);
        side[s] = acc;
      }
      g.v[n] = (side[0] - side[1]) / (2 * eps);
      uc.v[n] = saved;
      for (std::size_t m = 0; m < wwin.size(); ++m) {
        wk.Q.v[wwin[m].n] = sw[m];
        wk.w.x.v[wwin[m].n] = swx[m];
        wk.w.y.v[wwin[m].n] = swy[m];
      }
    }
  return g;
}

namespace detail {

// Quadratic model of the near-flat energy: the flat-limit Hessian of the
// discrete W0 is exactly (1/2) L^T W L with L = div(grad .) composed from the
// module's own first-derivative stencils, one-sided fallbacks included. Plain
// descent on the fourth-order energy stalls (conditioning ~ h^{-4}); this
// fixed preconditioner gives Newton-like steps near the flat minimum and is
// factorized once. The alpha term adds its own quadratic part.
inline Eigen::SparseMatrix<double> descent_preconditioner(const DiscreteDomain &d,
                                                          const std::vector<std::uint8_t> &free,
                                                          double alpha,
                                                          std::vector<std::int64_t> &num) {
  num.assign(d.size(), -1);
  std::int64_t nf = 0;
  for (std::size_t n = 0; n < d.size(); ++n)
    if (free[n]) num[n] = nf++;
  const auto N = static_cast<Eigen::Index>(d.size());
  // the stencil coefficients are recovered by probing gradient_at with
  // indicator fields over the dependency window
  std::vector<Eigen::Triplet<double>> tx, ty, tp, tw;
  ScalarField e(d);
  WindowCollector coll(d);
  std::vector<WindowNode> win;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t n = d.idx(i, j);
      if (d.cls[n] == NodeClass::exterior) continue;
      coll.collect(i, j, 3, 3, win);
      for (const auto &m : win) {
        e.v[m.n] = 1.0;
        double gx, gy;
        gradient_at(d, e, i, j, gx, gy);
        e.v[m.n] = 0.0;
        if (gx != 0) tx.push_back({int(n), int(m.n), gx});
        if (gy != 0) ty.push_back({int(n), int(m.n), gy});
      }
      tw.push_back({int(n), int(n), d.weight[n]});
      if (num[n] >= 0) tp.push_back({int(num[n]), int(n), 1.0});
    }
  Eigen::SparseMatrix<double> Dx(N, N), Dy(N, N), W(N, N), P(nf, N);
  Dx.setFromTriplets(tx.begin(), tx.end());
  Dy.setFromTriplets(ty.begin(), ty.end());
  W.setFromTriplets(tw.begin(), tw.end());
  P.setFromTriplets(tp.begin(), tp.end());
  Eigen::SparseMatrix<double> L = Eigen::SparseMatrix<double>(Dx * Dx) + Dy * Dy;
  Eigen::SparseMatrix<double> M_full = 0.5 * Eigen::SparseMatrix<double>(L.transpose() * W) * L;
  if (alpha != 0)
    M_full = M_full +
             alpha * (Eigen::SparseMatrix<double>(Dx.transpose() * W) * Dx +
                      Eigen::SparseMatrix<double>(Dy.transpose() * W) * Dy);
  Eigen::SparseMatrix<double> M = P * M_full * P.transpose();
  double mx = 0;
  for (std::int64_t k = 0; k < nf; ++k) mx = std::max(mx, M.coeff(k, k));
  Eigen::SparseMatrix<double> I(nf, nf);
  I.setIdentity();
  M = M + (1e-13 * mx + 1e-16) * I;
  return M;
}

} // namespace detail

struct MinimizeRow {
  int iter = 0;
  double energy = 0, grad_norm = 0, step = 0;
  double interior_residual = 0, boundary_residual = 0;
};

struct MinimizeResult {
  ScalarField u;
  std::vector<MinimizeRow> trace;
  bool converged = false;
  int iterations = 0;
  double min_q = 1.0; // Q^{-5/2} at the steepest node: near-vertical indicator
};

// Nodal residual of the Willmore equation Lap_Gamma H + 2 H (H^2/4 - K) with
// the Laplace-Beltrami operator in divergence form (1/Q) div(Q gInv grad f).
inline ScalarField willmore_residual(const ScalarField &u) {
  const DiscreteDomain &d = *u.dom;
  GeometryBundle b = geometry_bundle(u);
  VectorField gh = gradient(b.H_div);
  VectorField F(d);
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    F.x.v[n] = b.Q.v[n] * (b.gInv.xx.v[n] * gh.x.v[n] + b.gInv.xy.v[n] * gh.y.v[n]);
    F.y.v[n] = b.Q.v[n] * (b.gInv.xy.v[n] * gh.x.v[n] + b.gInv.yy.v[n] * gh.y.v[n]);
  }
  ScalarField divF = divergence(F);
  ScalarField res(d);
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d.cls[n] == NodeClass::exterior) continue;
    double H = b.H_div.v[n];
    res.v[n] = divF.v[n] / b.Q.v[n] + 2.0 * H * (0.25 * H * H - b.K.v[n]);
  }
  return res;
}

// |H - 2 gamma kappa_N| per boundary sample, the natural condition of the
// hinged problem
inline std::vector<std::vector<double>> navier_residual(const ScalarField &u, double gamma,
                                                        const BoundaryCurve &curve) {
  GeometryBundle b = geometry_bundle(u);
  BoundaryTrace ht = trace_from_field(b.H_div, curve);
  BoundaryTrace ut = trace_from_field(u, curve);
  auto kn = normal_curvature(u, curve, ut);
  std::vector<std::vector<double>> rows;
  for (std::size_t c = 0; c < curve.comps.size(); ++c) {
    std::vector<double> v(curve.comps[c].size());
    for (std::size_t s = 0; s < v.size(); ++s)
      v[s] = std::abs(ht.phi[c][s] - 2.0 * gamma * kn[c][s]);
    rows.push_back(std::move(v));
  }
  return rows;
}

inline MinimizeResult minimize(const DiscreteDomain &d, const MinimizeConfig &cfg,
                               const BoundaryCurve *curve = nullptr) {
  detail::validate_config(cfg);
  std::vector<std::uint8_t> free = free_node_mask(d, cfg.mode);
  std::size_t nfree = 0;
  for (auto f : free) nfree += f;
  if (nfree == 0) throw precondition_error("minimize: no free nodes under the constraints");
  MinimizeResult res;
  switch (cfg.init) {
  case InitField::phi_extension: res.u = ScalarField(d, cfg.phi); break;
  case InitField::zero: res.u = ScalarField(d); break;
  case InitField::custom:
    if (res.u = cfg.custom_init; res.u.dom != &d)
      throw precondition_error("minimize: custom initial field on the wrong domain");
    break;
  }
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t n = d.idx(i, j);
      if (d.cls[n] != NodeClass::exterior && !free[n]) res.u.v[n] = cfg.phi(d.px(i, j), d.py(i, j));
    }
  std::vector<std::int64_t> num;
  Eigen::SparseMatrix<double> M = detail::descent_preconditioner(d, free, cfg.alpha, num);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(M);
  bool have_pre = solver.info() == Eigen::Success;
  double E = discrete_energy(res.u, cfg);
  double step = cfg.step_init;
  auto record = [&](int iter, double gnorm, double t) {
    MinimizeRow row;
    row.iter = iter;
    row.energy = E;
    row.grad_norm = gnorm;
    row.step = t;
    ScalarField r = willmore_residual(res.u);
    for (std::size_t n = 0; n < d.size(); ++n)
      if (free[n]) row.interior_residual = std::max(row.interior_residual, std::abs(r.v[n]));
    if (curve) {
      auto nr = navier_residual(res.u, cfg.gamma, *curve);
      for (const auto &comp : nr)
        for (double v : comp) row.boundary_residual = std::max(row.boundary_residual, v);
    }
    res.trace.push_back(row);
  };
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    ScalarField g = discrete_energy_gradient(res.u, cfg);
    double gnorm = 0;
    for (std::size_t n = 0; n < d.size(); ++n)
      if (free[n]) gnorm += g.v[n] * g.v[n];
    gnorm = std::sqrt(gnorm);
    if (gnorm < cfg.tol_grad) {
      res.converged = true;
      record(iter, gnorm, 0.0);
      break;
    }
    // preconditioned direction, steepest-descent fallback
    Eigen::VectorXd gv(M.rows());
    for (std::size_t n = 0; n < d.size(); ++n)
      if (free[n]) gv[num[n]] = g.v[n];
    ScalarField dir(d);
    double slope = 0;
    if (have_pre) {
      Eigen::VectorXd y = solver.solve(gv);
      for (std::size_t n = 0; n < d.size(); ++n)
        if (free[n]) {
          dir.v[n] = -y[num[n]];
          slope += g.v[n] * dir.v[n];
        }
    }
    if (!have_pre || !(slope < 0)) {
      slope = 0;
      for (std::size_t n = 0; n < d.size(); ++n)
        if (free[n]) {
          dir.v[n] = -g.v[n];
          slope -= g.v[n] * g.v[n];
        }
    }
    double t = step;
    int backtracks = 0;
    ScalarField trial(d);
    double Et = 0;
    bool accepted = false;
    while (backtracks <= 50) {
      trial = res.u;
      for (std::size_t n = 0; n < d.size(); ++n)
        if (free[n]) trial.v[n] += t * dir.v[n];
      Et = discrete_energy(trial, cfg);
      if (Et <= E + cfg.armijo * t * slope) {
        accepted = true;
        break;
      }
      t *= cfg.backtrack;
      ++backtracks;
    }
    if (!accepted)
      throw numerical_error("minimize: line search stagnated after 50 backtracks at iteration " +
                            std::to_string(iter) + " (energy " + std::to_string(E) +
                            ", gradient norm " + std::to_string(gnorm) + ")");
    res.u = trial;
    bool stalled = std::abs(E - Et) <= cfg.tol_energy * std::max(1.0, std::abs(Et));
    E = Et;
    step = backtracks == 0 ? std::min(2.0 * t, cfg.step_max) : t;
    res.iterations = iter + 1;
    record(iter, gnorm, t);
    if (stalled) {
      res.converged = true;
      break;
    }
  }
  VectorField gr = gradient(res.u);
  double qmax = 1.0;
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d.cls[n] != NodeClass::exterior)
      qmax = std::max(qmax, 1.0 + gr.x.v[n] * gr.x.v[n] + gr.y.v[n] * gr.y.v[n]);
  res.min_q = std::pow(std::sqrt(qmax), -2.5);
  return res;
}

} // namespace willmore

#endif
