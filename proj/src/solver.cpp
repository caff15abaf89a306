#include "nplap/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nplap {

namespace {

int thread_count(int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!a.grid_ptr() || !b.grid_ptr() || !(a.grid() == b.grid()))
    throw InvalidArgument(std::string(what) + ": fields live on different grids");
}

// Characteristic gradient scale of the problem, used to bound dt where |Du| ~ 0.
double characteristic_gradient(const ProblemSpec& spec) {
  const Grid& g = spec.grid();
  const double R = g.domain().radius;
  double gmin = std::numeric_limits<double>::infinity();
  double gmax = -gmin;
  for (std::size_t node : g.boundary_nodes()) {
    const double v = boundary_value(spec, node);
    gmin = std::min(gmin, v);
    gmax = std::max(gmax, v);
  }
  const double osc = g.boundary_nodes().empty() ? 0.0 : gmax - gmin;
  double fmax = spec.source.sup_norm();
  if (spec.params.henon_mode) fmax *= std::pow(std::max(std::abs(gmax), std::abs(gmin)), spec.params.m);
  const double scale = std::max(osc / R, std::pow(fmax * R, 1.0 / (1.0 + spec.params.theta)));
  return scale > 0.0 ? scale : 1.0;
}

// Nonnegative root s of s + a s^m = b for a > 0, b > 0 (safeguarded Newton).
double absorption_root(double a, double b, double m) {
  double lo = 0.0;
  double hi = b;
  double s = b / (1.0 + a * std::pow(b, m - 1.0));
  for (int k = 0; k < 100; ++k) {
    const double sm = std::pow(s, m);
    const double F = s + a * sm - b;
    if (F == 0.0) return s;
    if (F > 0.0) hi = s;
    else lo = s;
    if (hi - lo <= 1e-15 * b) break;
    const double dF = 1.0 + a * m * sm / s;
    double next = s - F / dF;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    s = next;
  }
  return s;
}

struct Bracket {
  const ScalarField* lo = nullptr;
  const ScalarField* hi = nullptr;
};

void log_line(std::ostream* os, const IterationSample& s) {
  if (!os) return;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d %.17g %.17g\n", s.iter, s.residual, s.dt);
  *os << buf;
}

bool window_flag(const std::vector<double>& res) {
  if (res.empty()) return false;
  const double start = 10.0 * res.front();
  constexpr std::size_t kWindow = 50;
  for (std::size_t i = 0; i + kWindow < res.size(); ++i)
    if (res[i] <= start && res[i + kWindow] > res[i]) return true;
  return false;
}

SolveResult iterate(const ProblemSpec& spec, const SolverConfig& cfg, ScalarField u,
                    const Bracket& bracket) {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid& g = spec.grid();
  const auto& nodes = g.interior_nodes();
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(nodes.size());
  const int nthreads = thread_count(cfg.threads);

  SolveReport rep;
  rep.damping = cfg.damping ? *cfg.damping
                            : std::min(1.0, 3.0 * g.spacing() / g.domain().radius);
  rep.grad_floor = cfg.grad_floor ? *cfg.grad_floor : 0.1 * characteristic_gradient(spec);
  EnvelopeMode mode = cfg.envelope;
  if (mode.kind == EnvelopeMode::Kind::Regularized)
    mode.eps_grad = cfg.eps_grad ? *cfg.eps_grad : default_eps_grad(u);
  rep.eps_grad = mode.eps_grad;

  // Nonnegative Henon weights are stepped implicitly in the absorption term
  // (s + dt frak_f s_+^m = u + dt L); frak_f u_+^m is not Lipschitz at u = 0.
  const bool implicit_absorption = spec.params.henon_mode;
  std::vector<double> R(g.node_count(), 0.0);
  std::vector<double> step(g.node_count(), 0.0);
  std::vector<double> vel(g.node_count(), 0.0);
  std::vector<double> per_iter;

  // One sweep: residual and local step on the frozen snapshot u.
  auto evaluate = [&](double* dt_min_out) {
    double rmax = 0.0;
    double dmin = std::numeric_limits<double>::infinity();
    bool finite = true;
#pragma omp parallel for schedule(static) num_threads(nthreads) \
    reduction(max : rmax) reduction(min : dmin) reduction(&& : finite)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      const std::size_t node = nodes[static_cast<std::size_t>(k)];
      const NodeResidual nr = residual_at(u, spec, mode, node, rep.grad_floor);
      double r = nr.value;
      if (!std::isfinite(r)) finite = false;
      const double src = spec.source[node];
      const bool implicit = implicit_absorption && src >= 0.0;
      const double stiff = implicit ? nr.stiffness : nr.stiffness + nr.absorption;
      const double d = stiff > 0.0 ? cfg.dt_safety / stiff : 0.0;
      double du = d * r;
      if (implicit && d > 0.0) {
        const double b = u[node] + d * (r + nr.rhs);
        const double a = d * src;
        du = (b > 0.0 && a > 0.0 ? absorption_root(a, b, spec.params.m) : b) - u[node];
      }
      if (bracket.lo) {
        const double lo = (*bracket.lo)[node];
        const double hi = (*bracket.hi)[node];
        if ((u[node] <= lo && r < 0.0) || (u[node] >= hi && r > 0.0)) {
          r = 0.0;
          du = 0.0;
        }
      }
      R[node] = r;
      step[node] = du;
      rmax = std::max(rmax, std::abs(r));
      if (d > 0.0) dmin = std::min(dmin, d);
    }
    if (!finite) {
      for (std::ptrdiff_t k = 0; k < count; ++k) {
        const std::size_t node = nodes[static_cast<std::size_t>(k)];
        if (!std::isfinite(R[node]))
          throw NumericalError("solver: non-finite residual at node " + std::to_string(node));
      }
    }
    *dt_min_out = std::isfinite(dmin) ? dmin : 0.0;
    return rmax;
  };

  double dt_min = 0.0;
  double res = evaluate(&dt_min);
  const double res0 = res;
  per_iter.push_back(res);
  int it = 0;
  auto sample_now = [&] {
    IterationSample s{it, res, dt_min};
    rep.history.push_back(s);
    log_line(cfg.log, s);
  };
  sample_now();

  // Stall guard: heavy-ball can lock into a cycle around near-critical nodes. If the
  // residual sets no new best for 50/damping iterations, momentum is dropped and the
  // damping doubled. Runs that never stall are unaffected.
  double damping = rep.damping;
  double beta = 1.0 - damping;
  double best = res;
  int best_it = 0;
  while (res > cfg.tol && it < cfg.max_iters) {
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      const std::size_t node = nodes[static_cast<std::size_t>(k)];
      double v = beta * vel[node] + step[node];
      double x = u[node] + v;
      if (bracket.lo) {
        const double lo = (*bracket.lo)[node];
        const double hi = (*bracket.hi)[node];
        if (x <= lo) {
          x = lo;
          v = 0.0;
        } else if (x >= hi) {
          x = hi;
          v = 0.0;
        }
      }
      vel[node] = v;
      u[node] = x;
    }
    ++it;
    res = evaluate(&dt_min);
    per_iter.push_back(res);
    if (res < best) {
      best = res;
      best_it = it;
    } else if (damping < 1.0 && it - best_it > 50.0 / damping) {
      damping = std::min(1.0, 2.0 * damping);
      beta = 1.0 - damping;
      std::fill(vel.begin(), vel.end(), 0.0);
      best_it = it;
    }
    if (res > 1e3 * std::max(res0, cfg.tol)) {
      sample_now();
      throw DivergenceError("solver: residual grew from " + std::to_string(res0) + " to " +
                                std::to_string(res) + " at iteration " + std::to_string(it),
                            rep.history);
    }
    if (cfg.log_every > 0 && it % cfg.log_every == 0) sample_now();
  }
  if (rep.history.empty() || rep.history.back().iter != it) sample_now();

  u.check_finite();
  rep.iterations = it;
  rep.final_residual = res;
  rep.converged = res <= cfg.tol;
  rep.flagged = window_flag(per_iter);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(u), std::move(rep)};
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidArgument("solver: tol must be positive");
  if (max_iters < 1) throw InvalidArgument("solver: max_iters must be at least 1");
  if (!(dt_safety > 0.0 && dt_safety <= 1.0))
    throw InvalidArgument("solver: dt_safety must lie in (0, 1]");
  if (damping && !(*damping > 0.0 && *damping <= 1.0))
    throw InvalidArgument("solver: damping must lie in (0, 1]");
  if (eps_grad && !(*eps_grad > 0.0)) throw InvalidArgument("solver: eps_grad must be positive");
  if (grad_floor && !(*grad_floor >= 0.0))
    throw InvalidArgument("solver: grad_floor must be non-negative");
  if (threads < 0) throw InvalidArgument("solver: threads must be non-negative");
}

void pin_boundary(ScalarField& u, const ProblemSpec& spec) {
  const Grid& g = u.grid();
  for (std::size_t node : g.boundary_nodes()) {
    const double v = boundary_value(spec, node);
    if (!std::isfinite(v))
      throw InvalidArgument("solver: boundary datum is not finite at node " +
                            std::to_string(node));
    u[node] = v;
  }
}

ScalarField initial_guess(const ProblemSpec& spec) {
  const GridPtr& gp = spec.grid_ptr();
  const Grid& g = *gp;
  ScalarField u(gp, 0.0, "u");
  pin_boundary(u, spec);
  double mean = 0.0;
  for (std::size_t node : g.boundary_nodes()) mean += u[node];
  if (!g.boundary_nodes().empty()) mean /= static_cast<double>(g.boundary_nodes().size());
  const Vec& c = g.domain().center;
  const double R = g.domain().radius;
  for (std::size_t node : g.interior_nodes()) {
    const double t = std::min(1.0, (g.position(node) - c).norm() / R);
    u[node] = (1.0 - t) * mean + t * boundary_value(spec, node);
  }
  return u;
}

SolveResult solve_dirichlet(const ProblemSpec& spec, const SolverConfig& cfg,
                            const std::optional<ScalarField>& init) {
  spec.validate();
  cfg.validate();
  ScalarField u;
  if (init) {
    if (!(init->grid() == spec.grid()))
      throw InvalidArgument("solver: initial field lives on a different grid");
    u = *init;
    u.set_tag("u");
    pin_boundary(u, spec);
  } else {
    u = initial_guess(spec);
  }
  return iterate(spec, cfg, std::move(u), {});
}

double comparison_check(const ScalarField& u_sub, const ScalarField& u_super) {
  require_same_grid(u_sub, u_super, "comparison_check");
  double worst = 0.0;
  for (std::size_t node : u_sub.grid().interior_nodes())
    worst = std::max(worst, u_sub[node] - u_super[node]);
  return worst;
}

SolveResult perron_bracket(const ProblemSpec& spec, const SolverConfig& cfg,
                           const ScalarField& u_sub, const ScalarField& u_super) {
  spec.validate();
  cfg.validate();
  require_same_grid(u_sub, u_super, "perron_bracket");
  if (!(u_sub.grid() == spec.grid()))
    throw InvalidArgument("perron_bracket: bracket and problem grids differ");
  const double gap = comparison_check(u_sub, u_super);
  if (gap > cfg.tol)
    throw InvalidArgument("perron_bracket: invalid bracket, sub exceeds super by " +
                          std::to_string(gap));
  const Grid& g = spec.grid();
  for (std::size_t node : g.boundary_nodes()) {
    const double b = boundary_value(spec, node);
    if (u_sub[node] > b + cfg.tol || u_super[node] < b - cfg.tol)
      throw InvalidArgument("perron_bracket: bracket does not enclose g at boundary node " +
                            std::to_string(node));
  }
  ScalarField u = u_super;
  u.set_tag("u");
  pin_boundary(u, spec);
  return iterate(spec, cfg, std::move(u), {&u_sub, &u_super});
}

ProbeReport monotonicity_probe(const ProblemSpec& spec, const ScalarField& u, std::size_t node,
                               double magnitude) {
  require_same_grid(u, spec.source, "monotonicity_probe");
  if (!u.grid().is_interior(node))
    throw InvalidArgument("monotonicity_probe: node " + std::to_string(node) +
                          " is not interior");
  const EnvelopeMode mode = EnvelopeMode::regularized(default_eps_grad(u));
  ProbeReport rep;
  rep.node = node;
  rep.magnitude = magnitude;
  const double base = residual_at(u, spec, mode, node).value;
  ScalarField w = u;
  double scale = 0.0;
  for (std::ptrdiff_t off : u.grid().neighbourhood_offsets()) {
    const std::size_t nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + off);
    w[nb] += magnitude;
    const double d = residual_at(w, spec, mode, node).value - base;
    w[nb] = u[nb];
    rep.neighbours.push_back({off, d});
    scale = std::max(scale, std::abs(d));
  }
  w[node] += magnitude;
  rep.center_delta = residual_at(w, spec, mode, node).value - base;
  scale = std::max(scale, std::abs(rep.center_delta));
  const double tiny = 1e-12 * scale;
  for (const auto& e : rep.neighbours)
    if (e.delta < -tiny) rep.monotone = false;
  if (rep.center_delta > tiny) rep.monotone = false;
  if (!rep.monotone)
    rep.note = spec.params.upwind_drift
                   ? "non-monotone response"
                   : "non-monotone response; consider upwind_drift";
  return rep;
}

}  // namespace nplap
