// Experiment drivers: configuration parsing, named analytic data families,
// report emission. Exit codes: 0 success, 1 numerical failure, 2 config error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "willmore/boundary.hpp"
#include "willmore/config.hpp"
#include "willmore/corpus.hpp"
#include "willmore/energy.hpp"
#include "willmore/errors.hpp"
#include "willmore/graphgeom.hpp"
#include "willmore/io.hpp"
#include "willmore/minimize.hpp"
#include "willmore/relax.hpp"

namespace {

using namespace willmore;

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  long seed = 0;
  std::string resolutions_csv; // overrides [run] resolutions
};

struct AnalyticField {
  std::string name;
  std::function<double(double, double)> value;
  std::function<std::array<double, 2>(double, double)> grad;
};

struct Experiment {
  ConfigFile cf;
  std::uint64_t hash = 0;
  std::string out_dir;
  long seed = 0;
  std::vector<long> resolutions;

  // [domain]
  std::string mode, shape;
  double radius = 1.0, inner_radius = 0.25, width = 1.0, height = 1.0, excision = 0.0;
  long ntheta = 64;
};

AnalyticField make_family(const ConfigFile &cf) {
  std::string family = cf.get_string("data", "family", "zero");
  AnalyticField f;
  f.name = family;
  if (family == "zero") {
    f.value = [](double, double) { return 0.0; };
    f.grad = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
  } else if (family == "plane") {
    double ax = cf.get_double("data", "ax", 0.1);
    double ay = cf.get_double("data", "ay", 0.0);
    double c = cf.get_double("data", "c", 0.0);
    f.value = [=](double x, double y) { return ax * x + ay * y + c; };
    f.grad = [=](double, double) { return std::array<double, 2>{ax, ay}; };
  } else if (family == "cap") {
    f.value = [](double x, double y) { return std::sqrt(1.0 - x * x - y * y); };
    f.grad = [](double x, double y) {
      double u = std::sqrt(1.0 - x * x - y * y);
      return std::array<double, 2>{-x / u, -y / u};
    };
  } else if (family == "bump") {
    double amp = cf.get_double("data", "amp", 0.1);
    double w = cf.get_double("data", "width", 8.0);
    f.value = [=](double x, double y) { return amp * std::exp(-w * (x * x + y * y)); };
    f.grad = [=](double x, double y) {
      double e = amp * std::exp(-w * (x * x + y * y));
      return std::array<double, 2>{-2 * w * x * e, -2 * w * y * e};
    };
  } else if (family == "sine") {
    double amp = cf.get_double("data", "amp", 0.1);
    double fx = cf.get_double("data", "fx", 2.0);
    double fy = cf.get_double("data", "fy", 3.0);
    f.value = [=](double x, double y) { return amp * std::sin(fx * x) * std::sin(fy * y); };
    f.grad = [=](double x, double y) {
      return std::array<double, 2>{amp * fx * std::cos(fx * x) * std::sin(fy * y),
                                   amp * fy * std::sin(fx * x) * std::cos(fy * y)};
    };
  } else {
    throw config_error("config: field data.family has unknown value '" + family + "'");
  }
  return f;
}

Experiment load_experiment(const Options &opt) {
  Experiment ex;
  ex.cf = opt.config_path.empty() ? ConfigFile() : ConfigFile::parse_file(opt.config_path);
  if (!opt.resolutions_csv.empty()) ex.cf.set("run", "resolutions", opt.resolutions_csv);
  ex.cf.set("run", "seed", std::to_string(opt.seed));
  // the output directory is not part of the experiment, so it never enters
  // the hash: the same run into two directories yields identical reports
  ex.hash = config_hash(ex.cf);
  ex.out_dir = opt.out_dir;
  ex.seed = opt.seed;

  for (double v : ex.cf.get_list("run", "resolutions", {32, 64})) {
    long n = static_cast<long>(v);
    if (v != double(n) || n <= 0)
      throw config_error("config: field run.resolutions must list positive integers");
    if (!ex.resolutions.empty() && n <= ex.resolutions.back())
      throw config_error("config: field run.resolutions must be strictly increasing");
    ex.resolutions.push_back(n);
  }

  ex.mode = ex.cf.get_string("domain", "mode", "cartesian");
  if (ex.mode != "cartesian" && ex.mode != "polar")
    throw config_error("config: field domain.mode must be cartesian or polar");
  ex.shape = ex.cf.get_string("domain", "shape", "disk");
  if (ex.shape != "disk" && ex.shape != "annulus" && ex.shape != "rectangle")
    throw config_error("config: field domain.shape must be disk, annulus, or rectangle");
  ex.radius = ex.cf.get_double("domain", "radius", 1.0);
  if (ex.radius <= 0) throw config_error("config: field domain.radius must be positive");
  ex.inner_radius = ex.cf.get_double("domain", "inner_radius", 0.25);
  if (ex.shape == "annulus" && (ex.inner_radius <= 0 || ex.inner_radius >= ex.radius))
    throw config_error("config: field domain.inner_radius must lie in (0, radius)");
  ex.width = ex.cf.get_double("domain", "width", 1.0);
  ex.height = ex.cf.get_double("domain", "height", 1.0);
  if (ex.width <= 0 || ex.height <= 0)
    throw config_error("config: fields domain.width and domain.height must be positive");
  ex.excision = ex.cf.get_double("domain", "excision", 0.0);
  if (ex.excision < 0 || ex.excision >= ex.radius)
    throw config_error("config: field domain.excision must lie in [0, radius)");
  ex.ntheta = ex.cf.get_int("domain", "ntheta", 64);
  if (ex.ntheta < 8 || ex.ntheta % 2 != 0)
    throw config_error("config: field domain.ntheta must be even and at least 8");
  if (ex.cf.has("domain", "h") && ex.cf.get_double("domain", "h", 0.0) <= 0)
    throw config_error("config: field domain.h must be positive");
  return ex;
}

// resolution n: cartesian h = 1/n, polar nr = n radial rings
DiscreteDomain build_domain(const Experiment &ex, long n) {
  double h = ex.cf.has("domain", "h") ? ex.cf.get_double("domain", "h", 0.0) : 1.0 / double(n);
  if (ex.mode == "cartesian") {
    if (ex.shape == "disk") return make_disk_cartesian(ex.radius, h, ex.excision);
    if (ex.shape == "annulus") return make_annulus_cartesian(ex.inner_radius, ex.radius, h);
    return make_rectangle(ex.width, ex.height, h);
  }
  if (ex.shape == "rectangle")
    throw config_error("config: field domain.shape rectangle requires cartesian mode");
  if (ex.shape == "disk")
    return make_disk_polar(ex.radius, int(n), int(ex.ntheta), ex.excision);
  return make_annulus_polar(ex.inner_radius, ex.radius, int(n), int(ex.ntheta));
}

BoundaryCurve build_curve(const Experiment &ex, long nsamples) {
  if (ex.shape == "annulus")
    return boundary_annulus(ex.inner_radius, ex.radius, int(nsamples), int(nsamples));
  return boundary_circle(ex.radius, int(nsamples));
}

JsonObject domain_json(const Experiment &ex, const DiscreteDomain &d, long n) {
  JsonObject j;
  j.field("mode", ex.mode)
      .field("shape", ex.shape)
      .field("resolution", n)
      .field("nx", d.nx)
      .field("ny", d.ny)
      .field("h", d.h);
  return j;
}

// ---------------------------------------------------------------- energy --

int run_energy(const Experiment &ex) {
  AnalyticField fam = make_family(ex.cf);
  double gamma = ex.cf.get_double("energy", "gamma", 0.0);
  double alpha = ex.cf.get_double("energy", "alpha", 0.0);
  double h0 = ex.cf.get_double("energy", "h0", 0.0);
  std::vector<JsonObject> results;
  for (long n : ex.resolutions) {
    DiscreteDomain d = build_domain(ex, n);
    ScalarField u(d, fam.value);
    EnergyReport r = willmore_energy(u, gamma);
    HelfrichReport hf = helfrich(u, alpha, h0, gamma);
    JsonObject row;
    row.field("domain", domain_json(ex, d, n))
        .field("area", r.area)
        .field("w0", r.W0)
        .field("wgamma", r.Wgamma)
        .field("total_gauss", r.total_gauss)
        .field("helfrich", hf.value)
        .field("sup_u", r.sup_u);
    results.push_back(row);
  }
  JsonObject doc;
  doc.field("command", "energy")
      .field("config_hash", std::to_string(ex.hash))
      .field("family", fam.name)
      .field("gamma", gamma)
      .field("alpha", alpha)
      .field("h0", h0)
      .field("results", results);
  write_json(ex.out_dir + "/energy.json", doc);
  return 0;
}

// ---------------------------------------------------------------- verify --

struct VerifyRow {
  std::string check, field;
  double value = 0, tolerance = 0;
  bool pass = false;
};

void verify_one(const Experiment &ex, const std::string &name, const ScalarField &u,
                const std::function<double(double, double)> &value,
                const std::function<std::array<double, 2>(double, double)> &grad,
                std::vector<VerifyRow> &rows) {
  const DiscreteDomain &d = *u.dom;
  double tol = 10 * d.h * d.h;
  GeometryBundle b = geometry_bundle(u);

  // |A|^2 = H^2 - 2K holds pointwise
  double ah = 0;
  for (std::size_t n = 0; n < d.size(); ++n)
    if (d.cls[n] == NodeClass::interior)
      ah = std::max(ah, std::abs(b.A2.v[n] - (b.H.v[n] * b.H.v[n] - 2 * b.K.v[n])));
  rows.push_back({"ah_identity", name, ah, tol, ah < tol});

  // |D2u|^2/Q^2 >= |A|^2 >= |D2u|^2/Q^6 chain
  HessianBoundReport hb = hessian_bound_check(u);
  double viol = double(hb.upper_violations + hb.lower_violations);
  rows.push_back({"hessian_chain", name, viol, 0.5, viol == 0});

  // trace-data certificates with nonnegative margins
  BoundaryCurve curve = build_curve(ex, 4 * long(d.nx));
  BoundaryTrace trace = make_trace(
      curve, value,
      [&](double x, double y) {
        auto g = grad(x, y);
        double r = std::hypot(x, y);
        double sgn = (ex.shape == "annulus" && r < 0.5 * (ex.inner_radius + ex.radius)) ? -1 : 1;
        return r == 0 ? 0.0 : sgn * (g[0] * x + g[1] * y) / r;
      });
  EnergyReport cert = bound_certificates(u, curve, trace, 0.5);
  double kmargin = cert.cert.kbound_rhs - cert.cert.kbound_lhs;
  double amargin = cert.cert.abound_rhs - cert.cert.abound_lhs;
  double gmargin = cert.cert.gamma_gap_rhs - cert.cert.gamma_gap_lhs;
  // margins are sums of interior quadrature and boundary-trace quadrature,
  // so their discretization deficit scales with h rather than h^2
  double mtol = d.h;
  rows.push_back({"kbound_margin", name, kmargin, -mtol, kmargin >= -mtol});
  rows.push_back({"abound_margin", name, amargin, -mtol, amargin >= -mtol});
  rows.push_back({"gamma_gap_margin", name, gmargin, -mtol, gmargin >= -mtol});

  // Gauss-Bonnet with the geodesic curvature from the same trace
  GeodesicReport geo = geodesic_curvature(trace, curve);
  double gb = gauss_bonnet_residual(b, geo, curve.chi());
  rows.push_back({"gauss_bonnet", name, gb, 1e-2, gb < 1e-2});
}

int run_verify(const Experiment &ex) {
  long n = ex.resolutions.back();
  DiscreteDomain d = build_domain(ex, n);

  std::vector<VerifyRow> rows;
  struct Named {
    const char *name;
    std::function<double(double, double)> value;
    std::function<std::array<double, 2>(double, double)> grad;
  };
  std::vector<Named> corpus = {
      {"zero", [](double, double) { return 0.0; },
       [](double, double) { return std::array<double, 2>{0.0, 0.0}; }},
      {"plane", [](double x, double y) { return 0.2 * x - 0.1 * y; },
       [](double, double) { return std::array<double, 2>{0.2, -0.1}; }},
      {"bump", [](double x, double y) { return 0.15 * std::exp(-6 * (x * x + y * y)); },
       [](double x, double y) {
         double e = 0.15 * std::exp(-6 * (x * x + y * y));
         return std::array<double, 2>{-12 * x * e, -12 * y * e};
       }},
      {"sine", [](double x, double y) { return 0.1 * std::sin(2 * x) * std::sin(3 * y); },
       [](double x, double y) {
         return std::array<double, 2>{0.2 * std::cos(2 * x) * std::sin(3 * y),
                                      0.3 * std::sin(2 * x) * std::cos(3 * y)};
       }},
      {"saddle", [](double x, double y) { return 0.1 * (x * x - y * y) + 0.05 * x * y; },
       [](double x, double y) {
         return std::array<double, 2>{0.2 * x + 0.05 * y, -0.2 * y + 0.05 * x};
       }}};
  for (const auto &c : corpus) {
    ScalarField u(d, c.value);
    verify_one(ex, c.name, u, c.value, c.grad, rows);
  }

  // seeded random trig fields: smooth, small amplitude, analytic gradients
  long nrandom = ex.cf.get_int("verify", "random_fields", 20);
  std::mt19937_64 rng(std::uint64_t(ex.seed));
  std::uniform_real_distribution<double> amp(-0.08, 0.08), freq(0.5, 3.0),
      phase(0.0, 2 * std::numbers::pi);
  for (long k = 0; k < nrandom; ++k) {
    struct Term {
      double a, fx, fy, px, py;
    };
    std::vector<Term> terms(3);
    for (auto &t : terms) t = {amp(rng), freq(rng), freq(rng), phase(rng), phase(rng)};
    auto value = [terms](double x, double y) {
      double s = 0;
      for (const auto &t : terms) s += t.a * std::sin(t.fx * x + t.px) * std::sin(t.fy * y + t.py);
      return s;
    };
    auto grad = [terms](double x, double y) {
      std::array<double, 2> g{0.0, 0.0};
      for (const auto &t : terms) {
        g[0] += t.a * t.fx * std::cos(t.fx * x + t.px) * std::sin(t.fy * y + t.py);
        g[1] += t.a * t.fy * std::sin(t.fx * x + t.px) * std::cos(t.fy * y + t.py);
      }
      return g;
    };
    ScalarField u(d, value);
    verify_one(ex, "random_" + std::to_string(k), u, value, grad, rows);
  }

  std::vector<std::vector<std::string>> out;
  bool all_pass = true;
  for (const auto &r : rows) {
    all_pass = all_pass && r.pass;
    out.push_back({r.check, r.field, fmt17(r.value), fmt17(r.tolerance),
                   r.pass ? "pass" : "FAIL"});
  }
  write_csv(ex.out_dir + "/verify.csv", {"check", "field", "value", "tolerance", "status"}, out);
  JsonObject doc;
  doc.field("command", "verify")
      .field("config_hash", std::to_string(ex.hash))
      .field("seed", ex.seed)
      .field("checks", long(rows.size()))
      .field("failures", long(std::count_if(rows.begin(), rows.end(),
                                            [](const VerifyRow &r) { return !r.pass; })))
      .field("all_pass", all_pass);
  write_json(ex.out_dir + "/verify.json", doc);
  return all_pass ? 0 : 1;
}

// --------------------------------------------------------------- example --

ExampleId example_id_from(const std::string &name) {
  if (name == "logloglinear") return ExampleId::logloglinear;
  if (name == "radial_k") return ExampleId::radial_k;
  if (name == "radial_k_cylinder") return ExampleId::radial_k_cylinder;
  if (name == "sqrtlog") return ExampleId::sqrtlog;
  throw config_error("config: field example.name has unknown value '" + name + "'");
}

int run_example(const Experiment &ex) {
  std::string name = ex.cf.get_string("example", "name", "radial_k");
  ExampleParams p;
  p.eps = ex.cf.get_double("example", "eps", 1.0);
  p.k = int(ex.cf.get_int("example", "k", 3));
  p.jump = ex.cf.get_double("example", "jump", 1.0);
  ExampleField field = build_example(example_id_from(name), p);
  double pexp = ex.cf.get_double("example", "p", field.point_singularity ? 2.0 : 1.5);
  std::vector<double> deltas = ex.cf.get_list("example", "deltas", {0.4, 0.2, 0.1, 0.05});

  long n = ex.resolutions.back();
  DiscreteDomain d = make_disk_polar(field.domain_radius, int(n), int(ex.ntheta));
  ScalarField u = field.sample(d);
  auto diag = divergence_diagnostics(field, u, deltas, pexp);

  std::vector<std::vector<std::string>> out;
  for (const auto &row : diag)
    out.push_back({fmt17(row.delta), fmt17(row.grad_p), fmt17(row.hess2), fmt17(row.w0)});
  write_csv(ex.out_dir + "/example.csv", {"delta", "grad_p", "hess2", "w0"}, out);
  JsonObject doc;
  doc.field("command", "example")
      .field("config_hash", std::to_string(ex.hash))
      .field("name", name)
      .field("p", pexp)
      .field("resolution", n)
      .field("levels", long(diag.size()));
  write_json(ex.out_dir + "/example.json", doc);
  return 0;
}

// ----------------------------------------------------------------- relax --

int run_relax(const Experiment &ex) {
  std::string name = ex.cf.get_string("example", "name", "radial_k");
  ExampleParams p;
  p.k = int(ex.cf.get_int("example", "k", 3));
  p.jump = ex.cf.get_double("example", "jump", 1.0);
  ExampleField field = build_example(example_id_from(name), p);
  long levels = ex.cf.get_int("relax", "levels", 5);
  double band = ex.cf.get_double("relax", "band", 0.05);
  double conv_tol = ex.cf.get_double("relax", "conv_tol", 0.2);

  long n = ex.resolutions.back();
  DiscreteDomain d = make_disk_polar(field.domain_radius, int(n), int(ex.ntheta));
  ScalarField limit = field.sample(d);
  std::vector<ScalarField> seq;
  for (long j = 1; j <= levels; ++j) seq.push_back(mollified_sequence(field, d, int(j)));

  auto diag = sequence_diagnostics(seq, limit);
  std::vector<std::vector<std::string>> out;
  for (const auto &row : diag)
    out.push_back({fmt17(row.w0), fmt17(row.l1_dist), fmt17(row.q_h1), fmt17(row.v_h1),
                   fmt17(row.g_h1), fmt17(row.e_h1), fmt17(row.area)});
  write_csv(ex.out_dir + "/relax.csv", {"w0", "l1_dist", "q_h1", "v_h1", "g_h1", "e_h1", "area"},
            out);

  LscReport lsc = lsc_check(seq, limit, jump_circle_flags(d, band), conv_tol);
  JsonObject doc;
  doc.field("command", "relax")
      .field("config_hash", std::to_string(ex.hash))
      .field("name", name)
      .field("levels", levels)
      .field("liminf_w0", lsc.liminf_w0)
      .field("wa_limit", lsc.wa_limit)
      .field("margin", lsc.margin)
      .field("l1_dist", lsc.l1_dist);
  write_json(ex.out_dir + "/relax.json", doc);
  return 0;
}

// -------------------------------------------------------------- minimize --

int run_minimize(const Experiment &ex) {
  AnalyticField fam = make_family(ex.cf);
  MinimizeConfig cfg;
  std::string mode = ex.cf.get_string("minimize", "mode", "dirichlet");
  if (mode == "dirichlet")
    cfg.mode = ConstraintMode::dirichlet;
  else if (mode == "navier")
    cfg.mode = ConstraintMode::navier;
  else
    throw config_error("config: field minimize.mode must be dirichlet or navier");
  std::string init = ex.cf.get_string("minimize", "init", "phi");
  if (init == "phi")
    cfg.init = InitField::phi_extension;
  else if (init == "zero")
    cfg.init = InitField::zero;
  else if (init == "bump")
    cfg.init = InitField::custom;
  else
    throw config_error("config: field minimize.init must be phi, zero, or bump");
  cfg.phi = fam.value;
  cfg.gamma = ex.cf.get_double("energy", "gamma", 0.0);
  cfg.alpha = ex.cf.get_double("energy", "alpha", 0.0);
  cfg.H0 = ex.cf.get_double("energy", "h0", 0.0);
  cfg.max_iters = int(ex.cf.get_int("minimize", "max_iters", 500));
  cfg.step_init = ex.cf.get_double("minimize", "step_init", 1e-2);
  cfg.tol_grad = ex.cf.get_double("minimize", "tol_grad", 1e-8);
  cfg.tol_energy = ex.cf.get_double("minimize", "tol_energy", 1e-13);

  long n = ex.resolutions.back();
  DiscreteDomain d = build_domain(ex, n);
  if (cfg.init == InitField::custom) {
    double amp = ex.cf.get_double("minimize", "bump_amp", 0.1);
    double w = ex.cf.get_double("minimize", "bump_width", 8.0);
    auto phi = cfg.phi;
    cfg.custom_init = ScalarField(d, [=](double x, double y) {
      return phi(x, y) + amp * std::exp(-w * (x * x + y * y));
    });
  }
  BoundaryCurve curve = build_curve(ex, 4 * long(d.nx));
  MinimizeResult res = minimize(d, cfg, &curve);

  std::vector<std::vector<std::string>> trace;
  for (const auto &row : res.trace)
    trace.push_back({std::to_string(row.iter), fmt17(row.energy), fmt17(row.grad_norm),
                     fmt17(row.step), fmt17(row.interior_residual),
                     fmt17(row.boundary_residual)});
  write_csv(ex.out_dir + "/minimize_trace.csv",
            {"iter", "energy", "grad_norm", "step", "interior_residual", "boundary_residual"},
            trace);

  std::vector<std::vector<std::string>> field;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      std::size_t m = d.idx(i, j);
      if (d.cls[m] == NodeClass::exterior) continue;
      field.push_back({std::to_string(i), std::to_string(j), fmt17(d.px(i, j)),
                       fmt17(d.py(i, j)), fmt17(res.u.v[m])});
    }
  write_csv(ex.out_dir + "/minimize_field.csv", {"i", "j", "x", "y", "u"}, field);

  EnergyReport er = willmore_energy(res.u, cfg.gamma);
  JsonObject doc;
  doc.field("command", "minimize")
      .field("config_hash", std::to_string(ex.hash))
      .field("domain", domain_json(ex, d, n))
      .field("mode", mode)
      .field("family", fam.name)
      .field("converged", res.converged)
      .field("iterations", long(res.iterations))
      .field("w0", er.W0)
      .field("wgamma", er.Wgamma)
      .field("sup_u", er.sup_u)
      .field("min_q", res.min_q)
      .field("interior_residual", res.trace.back().interior_residual)
      .field("boundary_residual", res.trace.back().boundary_residual);
  write_json(ex.out_dir + "/minimize.json", doc);
  return 0;
}

// ----------------------------------------------------------------- sweep --

int run_sweep(const Experiment &ex) {
  if (ex.resolutions.size() < 2)
    throw config_error("config: field run.resolutions needs at least two levels for a sweep");
  AnalyticField fam = make_family(ex.cf);
  double gamma = ex.cf.get_double("energy", "gamma", 0.0);

  // analytic reference where one exists, Richardson differences otherwise;
  // the unit-sphere cap has H = -2 so W0 equals the cap area
  bool has_ref = fam.name == "cap" && ex.shape == "disk";
  double ref =
      has_ref ? 2 * std::numbers::pi * (1.0 - std::sqrt(1.0 - ex.radius * ex.radius)) : 0.0;

  std::vector<double> w0s, hs;
  for (long n : ex.resolutions) {
    DiscreteDomain d = build_domain(ex, n);
    ScalarField u(d, fam.value);
    w0s.push_back(willmore_energy(u, gamma).W0);
    hs.push_back(d.h);
  }

  std::vector<std::vector<std::string>> out;
  std::vector<double> orders;
  for (std::size_t k = 0; k < w0s.size(); ++k) {
    double err = has_ref ? std::abs(w0s[k] - ref)
                         : (k + 1 < w0s.size() ? std::abs(w0s[k + 1] - w0s[k]) : 0.0);
    double order = 0;
    if (k > 0) {
      double eprev = has_ref ? std::abs(w0s[k - 1] - ref) : std::abs(w0s[k] - w0s[k - 1]);
      double ecur = has_ref ? err : (k + 1 < w0s.size() ? err : 0.0);
      if (ecur > 0 && eprev > 0 && hs[k] < hs[k - 1]) {
        order = std::log(eprev / ecur) / std::log(hs[k - 1] / hs[k]);
        orders.push_back(order);
      }
    }
    out.push_back({std::to_string(ex.resolutions[k]), fmt17(hs[k]), fmt17(w0s[k]), fmt17(err),
                   fmt17(order)});
  }
  write_csv(ex.out_dir + "/sweep.csv", {"n", "h", "w0", "err", "order"}, out);

  double mean_order = 0;
  for (double o : orders) mean_order += o;
  if (!orders.empty()) mean_order /= double(orders.size());
  JsonObject doc;
  doc.field("command", "sweep")
      .field("config_hash", std::to_string(ex.hash))
      .field("family", fam.name)
      .field("reference", has_ref ? ref : 0.0)
      .field("has_reference", has_ref)
      .field("mean_order", mean_order);
  write_json(ex.out_dir + "/sweep.json", doc);
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Willmore graph-surface toolkit"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "configuration file (key = value, [section])");
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--seed", opt.seed, "RNG seed for randomized checks");
  app.add_option("--resolutions", opt.resolutions_csv, "override resolution list (CSV)");

  std::string cmd;
  for (const char *name : {"energy", "verify", "example", "relax", "minimize", "sweep"}) {
    CLI::App *sub = app.add_subcommand(name);
    sub->fallthrough();
    sub->callback([&cmd, name] { cmd = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    Experiment ex = load_experiment(opt);
    std::filesystem::create_directories(ex.out_dir);
    int rc = 1;
    if (cmd == "energy") rc = run_energy(ex);
    else if (cmd == "verify") rc = run_verify(ex);
    else if (cmd == "example") rc = run_example(ex);
    else if (cmd == "relax") rc = run_relax(ex);
    else if (cmd == "minimize") rc = run_minimize(ex);
    else if (cmd == "sweep") rc = run_sweep(ex);
    if (rc == 0)
      std::printf("%s: ok (reports in %s)\n", cmd.c_str(), ex.out_dir.c_str());
    else
      std::printf("%s: FAILED (reports in %s)\n", cmd.c_str(), ex.out_dir.c_str());
    return rc;
  } catch (const config_error &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 1;
  }
}
