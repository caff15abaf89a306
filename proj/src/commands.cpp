#include "nplap/commands.hpp"

#include "nplap/analysis.hpp"
#include "nplap/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nplap {

namespace fs = std::filesystem;

namespace {

std::ostream& console(const CommandOptions& opt) {
  return opt.out_stream ? *opt.out_stream : std::cout;
}

Vec to_vec(const std::vector<double>& v) {
  Vec x(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<int>(i)] = v[i];
  return x;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool wants(const ExperimentConfig& cfg, const char* format) {
  return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

fs::path output_dir(const ExperimentConfig& cfg, const CommandOptions& opt) {
  if (opt.out) return *opt.out;
  fs::path d = cfg.output_dir;
  if (d.is_relative() && cfg.source.has_parent_path()) d = cfg.source.parent_path() / d;
  return d;
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

ScalarFn scalar_from(const CoefficientSource& c, const std::function<ScalarFn()>& from_profile,
                     double fallback) {
  switch (c.kind) {
    case CoefficientSource::Kind::Default:
      return [fallback](const Vec&) { return fallback; };
    case CoefficientSource::Kind::Profile:
      return from_profile();
    case CoefficientSource::Kind::Expressions: {
      const Expression e = c.components.front();
      return [e](const Vec& x) { return e(x); };
    }
  }
  return {};
}

VectorFn vector_from(const CoefficientSource& c, int dim, const std::function<VectorFn()>& from_profile) {
  switch (c.kind) {
    case CoefficientSource::Kind::Default:
      return [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
    case CoefficientSource::Kind::Profile:
      return from_profile();
    case CoefficientSource::Kind::Expressions: {
      const std::vector<Expression> comps = c.components;
      return [comps, dim](const Vec& x) {
        Vec b(dim);
        for (int a = 0; a < dim; ++a)
          b[a] = comps.size() == 1 ? comps.front()(x) : comps[static_cast<std::size_t>(a)](x);
        return b;
      };
    }
  }
  return {};
}

ScalarField sample_bracket(const Experiment& ex, const std::optional<Expression>& e, double fallback) {
  if (!e) return sample([fallback](const Vec&) { return fallback; }, ex.grid, "bracket");
  const Expression expr = *e;
  return sample([expr](const Vec& x) { return expr(x); }, ex.grid, "bracket");
}

double boundary_sup(const Experiment& ex) {
  double s = 0.0;
  for (std::size_t node : ex.grid->boundary_nodes())
    s = std::max(s, std::abs(boundary_value(ex.spec, node)));
  return s;
}

Vec resolve_x0(const std::string& spec, const ScalarField& u, int dim, double tol) {
  if (spec == "min") return locate_extremum(u, Extremum::Min);
  if (spec == "max") return locate_extremum(u, Extremum::Max);
  if (spec == "free-boundary") {
    Vec e = Vec::Zero(dim);
    e[0] = 1.0;
    return free_boundary_point(u, u.grid().domain().center, e, tol);
  }
  std::vector<double> x;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string part = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    x.push_back(Expression::parse(part, dim)(Vec::Zero(dim)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return to_vec(x);
}

// Writes solution, report, iteration log and (Henon mode) dead-core statistics.
void write_solve_artifacts(const Experiment& ex, const SolveResult& res, const fs::path& dir) {
  write_solution(res.u, dir / "solution");
  nlohmann::json rep = to_json(res.report);
  write_text(dir / "report.json", dump_json(rep));
  write_text(dir / "iterations.log", iteration_log(res.report));
  if (ex.spec.params.henon_mode) {
    const double tol = ex.config.analysis.deadcore_tol;
    const PositivityReport pr = positivity_report(res.u, tol);
    nlohmann::json j = to_json(pr, *ex.grid);
    j["schema_version"] = kSchemaVersion;
    if (ex.config.profile && ex.config.profile->name == "henon") {
      const double r = ex.config.profile->r.value_or(0.25);
      const Vec x0 = to_vec(ex.config.profile->center);
      std::size_t exact = 0;
      for (std::size_t node : ex.grid->interior_nodes())
        if ((ex.grid->position(node) - x0).norm() <= r) ++exact;
      j["exact_ball_radius"] = r;
      j["exact_ball_count"] = exact;
      j["count_ratio"] = exact ? static_cast<double>(pr.dead_core.size()) / static_cast<double>(exact) : 0.0;
    }
    write_text(dir / "deadcore.json", dump_json(j));
  }
}

std::string summary(const SolveReport& r) {
  return std::string("converged=") + (r.converged ? "true" : "false") +
         " iterations=" + std::to_string(r.iterations) + " residual=" +
         fmt("%.6e", r.final_residual) + " seconds=" + fmt("%.3f", r.wall_seconds);
}

fs::path resolve_relative(const ExperimentConfig& cfg, const std::string& p) {
  fs::path path = p;
  if (path.is_relative() && cfg.source.has_parent_path()) path = cfg.source.parent_path() / path;
  return path;
}

}  // namespace

AnalyticProfile build_profile(const ProfileSettings& ps, const ExperimentConfig& cfg) {
  const ProblemParams& p = cfg.params;
  const int n = cfg.dim;
  if (ps.name == "henon") {
    return profile_henon(n, p.theta, p.p, p.henon_mode ? p.m : 0.0, p.sigma, ps.r.value_or(0.25),
                         cfg.radius, to_vec(ps.center),
                         ps.weight == "exact" ? HenonWeight::Exact : HenonWeight::Printed)
        .profile;
  }
  if (ps.name == "nonuniqueness") {
    auto pr = profile_nonuniqueness(n, p.theta, p.p, p.sigma);
    return ps.variant == "zero" ? pr.zero : pr.v;
  }
  if (ps.name == "power") return profile_power(n, ps.axis - 1, p.p, ps.alpha, p.theta, p.sigma).profile;
  if (ps.name == "barrier-nondeg") {
    const Regime regime = ps.regime == "superlinear" ? Regime::Superlinear : Regime::Sublinear;
    const double kappa =
        ps.kappa.value_or(0.5 * nondeg_kappa_bound(p.theta, p.p, p.sigma, n, ps.c0, regime, 0.0, 0.0));
    return barrier_nondeg(kappa, p.theta, p.p, p.sigma, n, ps.c0, regime).profile;
  }
  if (ps.name == "barrier-hopf") return barrier_hopf(ps.alpha_h, ps.r.value_or(0.5), n, p.theta, p.p);
  throw ConfigError("unknown profile \"" + ps.name + "\"", ps.line, "name");
}

Experiment build_experiment(const ExperimentConfig& cfg) {
  Experiment ex;
  ex.config = cfg;
  if (cfg.profile) ex.profile = build_profile(*cfg.profile, cfg);
  ex.grid = build_grid(cfg.dim, cfg.h, to_vec(cfg.center), cfg.radius);
  const AnalyticProfile* pr = ex.profile ? &*ex.profile : nullptr;
  auto need = [&](const char* what) {
    if (!pr) throw ConfigError(std::string("coefficient ") + what + " refers to a missing profile");
  };
  Coefficients c;
  c.drift = vector_from(cfg.drift, cfg.dim, [&] {
    need("drift");
    return pr->coefficients.drift;
  });
  c.rho = scalar_from(cfg.rho, [&] {
    need("rho");
    return pr->coefficients.rho;
  }, 0.0);
  c.source = scalar_from(cfg.source_term, [&] {
    need("source");
    return pr->coefficients.source;
  }, 0.0);
  c.boundary = scalar_from(cfg.boundary, [&] {
    need("boundary");
    return pr->value;
  }, 0.0);
  ex.spec = make_problem(ex.grid, cfg.params, c,
                         cfg.boundary_sampling == "nodal" ? BoundarySampling::Nodal
                                                          : BoundarySampling::Projection);
  return ex;
}

SolveResult run_solver(const Experiment& ex, int threads) {
  SolverConfig sc = ex.config.solver;
  sc.threads = threads;
  if (ex.config.method == "perron") {
    const double gsup = boundary_sup(ex);
    if (!ex.config.bracket_lower && !ex.spec.params.henon_mode)
      throw ConfigError("method = perron needs bracket_lower outside Henon mode");
    const ScalarField lo = sample_bracket(ex, ex.config.bracket_lower, 0.0);
    const ScalarField hi = sample_bracket(ex, ex.config.bracket_upper, gsup);
    return perron_bracket(ex.spec, sc, lo, hi);
  }
  return solve_dirichlet(ex.spec, sc);
}

double default_target(const ExperimentConfig& cfg) {
  const ProblemParams& p = cfg.params;
  if (p.henon_mode) {
    const double a = cfg.analysis.higher_continuity_alpha.value_or(0.0);
    return (2.0 + p.theta + a) / (1.0 + p.theta - p.m);
  }
  return 1.0 + 1.0 / (1.0 + p.theta);
}

int cmd_solve(const CommandOptions& opt) {
  apply_threads(opt.threads);
  const ExperimentConfig cfg = load_experiment(opt.config);
  const Experiment ex = build_experiment(cfg);
  const fs::path dir = output_dir(cfg, opt);
  SolveResult res;
  try {
    res = run_solver(ex, opt.threads);
  } catch (const DivergenceError& e) {
    SolveReport partial;
    partial.history = e.trace();
    write_text(dir / "iterations.log", iteration_log(partial));
    throw;
  }
  write_solve_artifacts(ex, res, dir);
  console(opt) << summary(res.report) << "\n";
  return res.report.converged ? kExitOk : kExitNumerical;
}

int cmd_exponent(const CommandOptions& opt) {
  apply_threads(opt.threads);
  const ExperimentConfig cfg = load_experiment(opt.config);
  const AnalysisSettings& a = cfg.analysis;
  const fs::path dir = output_dir(cfg, opt);
  ScalarField u;
  int status = kExitOk;
  if (a.field == "artifact") {
    const fs::path stem = resolve_relative(cfg, a.artifact);
    try {
      u = read_solution(stem);
    } catch (const IoError& e) {
      throw IoError("missing solution artifact: " + std::string(e.what()));
    }
  } else if (a.field == "profile") {
    if (!cfg.profile) throw ConfigError("analysis field = profile needs a [profile] name");
    const AnalyticProfile pr = build_profile(*cfg.profile, cfg);
    const GridPtr grid = build_grid(cfg.dim, cfg.h, to_vec(cfg.center), cfg.radius);
    u = sample(pr.value, grid, pr.name);
  } else {
    const Experiment ex = build_experiment(cfg);
    const SolveResult res = run_solver(ex, opt.threads);
    write_solve_artifacts(ex, res, dir);
    console(opt) << summary(res.report) << "\n";
    if (!res.report.converged) status = kExitNumerical;
    u = res.u;
  }

  const Vec x0 = resolve_x0(a.x0, u, u.grid().dim(), a.deadcore_tol);
  if (a.measure == "holder") {
    const double rad = a.subdomain_radius.value_or(0.5 * u.grid().domain().radius);
    const double v = holder_gradient_seminorm(u, a.alpha, Ball{x0, rad}, opt.seed);
    nlohmann::json j = {{"schema_version", kSchemaVersion},
                        {"alpha", a.alpha},
                        {"subdomain_center", std::vector<double>(x0.data(), x0.data() + x0.size())},
                        {"subdomain_radius", rad},
                        {"seed", opt.seed},
                        {"seminorm", v}};
    write_text(dir / "holder.json", dump_json(j));
    console(opt) << "seminorm=" << fmt("%.6g", v) << " alpha=" << fmt("%.6g", a.alpha) << "\n";
    return status;
  }

  std::vector<double> radii = a.radii.empty() ? dyadic_radii(2, 5, u.grid().domain().radius) : a.radii;
  const double target = a.target.value_or(default_target(cfg));
  FitResult fit = a.measure == "nondegeneracy" ? nondegeneracy_curve(u, x0, radii, target)
                                               : growth_exponent(u, x0, radii);
  nlohmann::json j = to_json(fit);
  j["schema_version"] = kSchemaVersion;
  j["measure"] = a.measure;
  j["target"] = target;
  j["delta"] = std::abs(fit.exponent - target);
  if (cfg.params.henon_mode && a.higher_continuity_alpha) {
    const ProblemParams& p = cfg.params;
    const double bound = (p.sigma - p.m * (2.0 + p.theta - p.sigma)) / (1.0 + p.theta - p.sigma);
    j["higher_continuity_alpha"] = *a.higher_continuity_alpha;
    j["higher_continuity_hypothesis_bound"] = bound;
    j["higher_continuity_hypothesis_holds"] = *a.higher_continuity_alpha >= bound;
  }
  if (wants(cfg, "json")) write_text(dir / "fit.json", dump_json(j));
  if (wants(cfg, "csv")) write_text(dir / "fit.csv", to_csv(fit));
  console(opt) << "exponent=" << fmt("%.6f", fit.exponent) << " target=" << fmt("%.6f", target)
               << " delta=" << fmt("%.6f", std::abs(fit.exponent - target));
  if (fit.constant) console(opt) << " constant=" << fmt("%.6g", *fit.constant);
  console(opt) << "\n";
  return status;
}

std::vector<AnalyticProfile> profiles_for_selector(const std::string& selector) {
  const std::vector<std::string> known = {"henon", "nonuniqueness", "power", "barrier-nondeg",
                                          "barrier-hopf"};
  if (selector != "all" && std::find(known.begin(), known.end(), selector) == known.end())
    throw ConfigError("unknown profile selector \"" + selector + "\"");
  auto on = [&](const char* name) { return selector == "all" || selector == name; };
  std::vector<AnalyticProfile> out;
  const Vec origin = Vec::Zero(2);
  if (on("henon")) {
    AnalyticProfile a = profile_henon(2, 1.0, 2.0, 0.0, 1.5, 0.25, 1.0, origin).profile;
    a.name = "henon(m=0)";
    out.push_back(a);
    AnalyticProfile b = profile_henon(2, 1.0, 2.0, 0.5, 1.0, 0.25, 1.0, origin).profile;
    b.name = "henon(m=0.5,printed-weight)";
    out.push_back(b);
    AnalyticProfile c =
        profile_henon(2, 1.0, 2.0, 0.5, 1.0, 0.25, 1.0, origin, HenonWeight::Exact).profile;
    c.name = "henon(m=0.5,exact-weight)";
    out.push_back(c);
  }
  if (on("nonuniqueness")) {
    const auto nu = profile_nonuniqueness(2, 1.0, 3.0, 1.5);
    out.push_back(nu.v);
    out.push_back(nu.zero);
  }
  if (on("power")) out.push_back(profile_power(2, 0, 3.0, 3.0, 1.0, 1.5).profile);
  if (on("barrier-nondeg")) {
    const double kb = nondeg_kappa_bound(1.0, 2.0, 1.5, 2, 1.0, Regime::Sublinear, 0.0, 0.0);
    out.push_back(barrier_nondeg(0.5 * kb, 1.0, 2.0, 1.5, 2, 1.0, Regime::Sublinear).profile);
  }
  if (on("barrier-hopf")) out.push_back(barrier_hopf(20.0, 0.5));
  return out;
}

int cmd_verify_profiles(const std::string& selector, double h_coarse, const CommandOptions& opt) {
  apply_threads(opt.threads);
  const std::vector<AnalyticProfile> profiles = profiles_for_selector(selector);
  const fs::path dir = opt.out ? *opt.out : fs::path("out");
  nlohmann::json all = nlohmann::json::array();
  std::string csv = "profile,h,node,position,residual,discrete_residual\n";
  char buf[256];
  for (const AnalyticProfile& p : profiles) {
    const ProfileCheck c = verify_profile(p, h_coarse);
    all.push_back(to_json(c));
    for (const auto& e : c.entries) {
      std::string pos;
      for (int a = 0; a < e.position.size(); ++a)
        pos += (a ? " " : "") + fmt("%.17g", e.position[a]);
      std::snprintf(buf, sizeof buf, "%s,%.17g,%zu,%s,%.17g,%.17g\n", c.name.c_str(), e.h, e.node,
                    pos.c_str(), e.residual, e.discrete_residual);
      csv += buf;
    }
    console(opt) << c.name << " " << c.verdict << " order=" << fmt("%.3f", c.observed_order)
                 << " exact_residual=" << fmt("%.3e", c.exact_residual_max) << "\n";
  }
  nlohmann::json doc = {{"schema_version", kSchemaVersion},
                        {"selector", selector},
                        {"h_coarse", h_coarse},
                        {"profiles", all}};
  write_text(dir / "verify.json", dump_json(doc));
  write_text(dir / "verify.csv", csv);
  return kExitOk;
}

int cmd_reference_exponents(const std::vector<double>& ps, const std::vector<double>& thetas,
                            const CommandOptions& opt) {
  const fs::path dir = opt.out ? *opt.out : fs::path("out");
  std::string csv = "p,theta,p_prime,lambda,Lambda,alpha_sharp,alpha_star,critical_growth\n";
  nlohmann::json rows = nlohmann::json::array();
  char buf[512];
  for (double p : ps) {
    for (double th : thetas) {
      const ReferenceExponents e = reference_exponents(p, th);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.p,
                    e.theta, e.p_prime, e.lambda, e.Lambda, e.alpha_sharp, e.alpha_star,
                    e.critical_growth);
      csv += buf;
      rows.push_back(to_json(e));
    }
  }
  write_text(dir / "reference_exponents.csv", csv);
  write_text(dir / "reference_exponents.json",
             dump_json({{"schema_version", kSchemaVersion}, {"rows", rows}}));
  console(opt) << csv;
  return kExitOk;
}

int cmd_residual_check(const CommandOptions& opt) {
  apply_threads(opt.threads);
  const ExperimentConfig cfg = load_experiment(opt.config);
  const Experiment ex = build_experiment(cfg);
  const fs::path dir = output_dir(cfg, opt);
  const fs::path stem = cfg.analysis.artifact.empty() ? dir / "solution"
                                                      : resolve_relative(cfg, cfg.analysis.artifact);
  ScalarField u;
  try {
    u = read_solution(stem);
  } catch (const IoError& e) {
    throw IoError("missing solution artifact: " + std::string(e.what()));
  }
  if (!(u.grid() == *ex.grid)) throw ConfigError("solution artifact does not match the config grid");
  // Re-home the field on the experiment grid so that grid identity checks pass.
  u = ScalarField(ex.grid, u.values(), u.tag());
  nlohmann::json modes = nlohmann::json::object();
  const std::pair<const char*, EnvelopeMode> list[] = {
      {"regularized", EnvelopeMode::regularized(cfg.solver.eps_grad.value_or(default_eps_grad(u)))},
      {"sub", EnvelopeMode::sub_envelope()},
      {"super", EnvelopeMode::super_envelope()}};
  for (const auto& [name, mode] : list) {
    const ScalarField r = residual(u, ex.spec, mode);
    double mx = 0.0, lo = 0.0, hi = 0.0;
    for (std::size_t node : ex.grid->interior_nodes()) {
      mx = std::max(mx, std::abs(r[node]));
      lo = std::min(lo, r[node]);
      hi = std::max(hi, r[node]);
    }
    modes[name] = {{"max_abs", mx}, {"min", lo}, {"max", hi}};
    console(opt) << name << " max_abs=" << fmt("%.6e", mx) << "\n";
  }
  write_text(dir / "residual.json", dump_json({{"schema_version", kSchemaVersion},
                                               {"interior_nodes", ex.grid->interior_nodes().size()},
                                               {"modes", modes}}));
  return kExitOk;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace nplap
