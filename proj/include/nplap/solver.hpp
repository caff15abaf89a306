#pragma once

#include "nplap/operator.hpp"

#include <optional>
#include <ostream>
#include <vector>

namespace nplap {

/// Pseudo-time iteration settings.
///
/// Each sweep computes the residual R on a frozen snapshot, forms a local step
/// dt = dt_safety / stiffness and advances a damped velocity
///   v <- (1 - damping) v + dt R,   u <- u + v.
/// damping = 1 is the plain explicit scheme u <- u + dt R.
struct SolverConfig {
  double tol = 1e-8;
  int max_iters = 200000;
  double dt_safety = 0.9;
  EnvelopeMode envelope{};
  std::optional<double> eps_grad;    // Regularized threshold; default_eps_grad(g) when empty
  std::optional<double> damping;     // in (0, 1]; 3h/R when empty
  std::optional<double> grad_floor;  // lower bound on the modulus inside dt; derived when empty
  int log_every = 100;
  int threads = 0;  // 0 keeps the OpenMP default
  std::ostream* log = nullptr;  // "iter residual dt" lines every log_every sweeps

  void validate() const;
};

struct IterationSample {
  int iter = 0;
  double residual = 0.0;
  double dt = 0.0;  // smallest local step of that sweep
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  double wall_seconds = 0.0;
  std::vector<IterationSample> history;  // sampled every log_every sweeps plus the last one
  bool flagged = false;  // residual rose over a 50-sweep window after reaching 10x initial
  double damping = 1.0;
  double grad_floor = 0.0;
  double eps_grad = 0.0;
};

/// Raised when the residual grows by 10^3 over its initial value.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::vector<IterationSample> trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const std::vector<IterationSample>& trace() const { return trace_; }

 private:
  std::vector<IterationSample> trace_;
};

struct SolveResult {
  ScalarField u;
  SolveReport report;
};

/// Radial blend of the boundary datum: mean of g at the center, g(projection) at the sphere.
ScalarField initial_guess(const ProblemSpec& spec);

/// Boundary nodes get g per the problem's boundary sampling (radial projection by default).
void pin_boundary(ScalarField& u, const ProblemSpec& spec);

SolveResult solve_dirichlet(const ProblemSpec& spec, const SolverConfig& cfg,
                            const std::optional<ScalarField>& init = std::nullopt);

/// max over Interior nodes of (u_sub - u_super)_+.
double comparison_check(const ScalarField& u_sub, const ScalarField& u_super);

/// Iteration started from u_super with nodewise clamping into [u_sub, u_super].
SolveResult perron_bracket(const ProblemSpec& spec, const SolverConfig& cfg,
                           const ScalarField& u_sub, const ScalarField& u_super);

struct ProbeEntry {
  std::ptrdiff_t offset = 0;  // flat offset of the perturbed neighbour
  double delta = 0.0;         // induced residual change
};

struct ProbeReport {
  std::size_t node = 0;
  double magnitude = 0.0;
  double center_delta = 0.0;  // change when the node itself is raised
  std::vector<ProbeEntry> neighbours;
  bool monotone = true;  // every neighbour delta >= 0 and center delta <= 0
  std::string note;
};

/// Raises each stencil value of `u` around `node` by `magnitude` and records the
/// residual response under the Regularized mode.
ProbeReport monotonicity_probe(const ProblemSpec& spec, const ScalarField& u, std::size_t node,
                               double magnitude);

}  // namespace nplap
