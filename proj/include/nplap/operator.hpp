#pragma once

#include "nplap/grid.hpp"

#include <utility>

namespace nplap {

/// How the normalized p-Laplacian is evaluated where the gradient vanishes.
///
/// Regularized treats |grad| <= eps_grad as critical and drops the directional
/// term there. SubEnvelope / SuperEnvelope take the eigenvalue branches used by
/// the viscosity sub- and supersolution tests at exactly-critical points.
struct EnvelopeMode {
  enum class Kind { Regularized, SubEnvelope, SuperEnvelope };

  Kind kind = Kind::Regularized;
  double eps_grad = 1e-8;

  static EnvelopeMode regularized(double eps_grad);
  static EnvelopeMode sub_envelope() { return {Kind::SubEnvelope, 0.0}; }
  static EnvelopeMode super_envelope() { return {Kind::SuperEnvelope, 0.0}; }
};

const char* to_string(EnvelopeMode::Kind kind);

/// Scalar parameters of one PDE instance.
struct ProblemParams {
  double p = 2.0;       // ellipticity parameter, p > 1
  double theta = 1.0;   // degeneracy exponent, theta > 0
  double sigma = 1.5;   // Hamiltonian exponent
  double m = 0.0;       // absorption exponent (Henon mode only)
  bool henon_mode = false;
  bool regime_override = false;  // permits sigma outside (theta, theta + 1) and m = 1 + theta
  bool upwind_drift = false;     // first-order upwinding of <B, grad u>
};

/// Throws InvalidArgument when the parameters violate their admissible ranges.
void validate(const ProblemParams& params);

/// Coefficient generators used to build a ProblemSpec on a grid.
struct Coefficients {
  VectorFn drift;     // B(x)
  ScalarFn rho;       // rho(x)
  ScalarFn source;    // f(x), or the weight frak_f(x) in Henon mode
  ScalarFn boundary;  // Dirichlet datum g(x)
};

/// Where a Boundary node reads the Dirichlet datum: at its radial projection onto the
/// sphere, or at the node itself (for data defined on a neighbourhood of the sphere).
enum class BoundarySampling { Projection, Nodal };

/// Full description of one PDE instance sampled on a grid:
///   |Du|^theta (Delta_p^N u + <B, Du>) + rho |Du|^sigma = f          (standard)
///   |Du|^theta (Delta_p^N u + <B, Du>) + rho |Du|^sigma = frak_f u_+^m (Henon)
struct ProblemSpec {
  ProblemParams params;
  VectorField drift;
  ScalarField rho;
  ScalarField source;
  ScalarFn boundary;
  BoundarySampling boundary_sampling = BoundarySampling::Projection;

  const Grid& grid() const { return rho.grid(); }
  const GridPtr& grid_ptr() const { return rho.grid_ptr(); }
  /// Checks parameter ranges and that all fields share one grid.
  void validate() const;
};

ProblemSpec make_problem(const GridPtr& grid, const ProblemParams& params,
                         const Coefficients& coeffs,
                         BoundarySampling sampling = BoundarySampling::Projection);

/// Dirichlet value a Boundary node is pinned to.
double boundary_value(const ProblemSpec& spec, std::size_t node);

/// lambda^N_p = min(1, p-1) and Lambda^N_p = max(1, p-1).
double ellipticity_lower(double p);
double ellipticity_upper(double p);

// ---------------------------------------------------------------------------
// Stencils (Interior nodes only)

/// Central differences per axis.
Vec gradient(const ScalarField& u, std::size_t node);

/// 3-point second differences on the diagonal, 4-point cross differences off it.
Mat hessian(const ScalarField& u, std::size_t node);

/// Gradient magnitude used for the degeneracy factor |Du|^theta:
/// max(|central gradient|, (h/2) |diag second differences|). The second term
/// only dominates within O(h) of critical points, where the central gradient
/// of a smooth extremum is identically zero.
double degeneracy_modulus(const ScalarField& u, std::size_t node);

// ---------------------------------------------------------------------------
// Pointwise operators

/// Cyclic Jacobi rotations; eigenvalues sorted ascending.
Vec symmetric_eigenvalues(const Mat& m);

/// (lambda_min, lambda_max). Throws InvalidArgument for asymmetric input.
std::pair<double, double> eig_extremes(const Mat& m);

/// trace(H) + (p - 2) <H nu, nu> with the critical-point branches of `mode`.
double normalized_p_laplacian(const Vec& grad, const Mat& hess, double p,
                              const EnvelopeMode& mode);

enum class PucciSign { Minus, Plus };

double pucci(const Mat& hess, double lambda, double Lambda, PucciSign sign);

/// <B, xi> |xi|^theta + rho |xi|^sigma, with 0 at xi = 0.
double hamiltonian(const Vec& drift, double rho, const Vec& grad, double theta, double sigma);
double hamiltonian(std::size_t node, const Vec& grad, const ProblemSpec& spec);

/// Coefficient values at one point.
struct PointCoefficients {
  Vec drift;
  double rho = 0.0;
  double source = 0.0;
};

/// Equation left-hand side minus right-hand side at a point, given derivatives.
/// `modulus` is the degeneracy magnitude (|grad| for exact derivatives).
double pointwise_residual(const Vec& grad, const Mat& hess, double modulus, double value,
                          const PointCoefficients& coeffs, const ProblemParams& params,
                          const EnvelopeMode& mode);

/// Per-node diagnostic used by the solver to pick local pseudo-time steps.
struct NodeResidual {
  double value = 0.0;       // residual
  double modulus = 0.0;     // degeneracy modulus
  double stiffness = 0.0;   // bound on |dR/du_neighbour| summed over the stencil
  double rhs = 0.0;         // f, or frak_f u_+^m in Henon mode
  double absorption = 0.0;  // |d rhs / du| at the node (Henon mode, u > 0)
};

NodeResidual residual_at(const ScalarField& u, const ProblemSpec& spec, const EnvelopeMode& mode,
                         std::size_t node, double grad_floor = 0.0);

/// Residual at Interior nodes; Boundary and Exterior nodes carry 0.
ScalarField residual(const ScalarField& u, const ProblemSpec& spec, const EnvelopeMode& mode);

/// eps_grad = 1e-8 * (1 + |u|_inf / h).
double default_eps_grad(const ScalarField& u);

}  // namespace nplap
