#include "nplap/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nplap {

namespace {

// x^e for x >= 0 with 0^e = 0 (e > 0) and 0^0 = 1.
inline double power(double x, double e) {
  if (e == 1.0) return x;
  if (e == 0.0) return 1.0;
  if (x == 0.0) return e > 0.0 ? 0.0 : HUGE_VAL;
  if (e == 2.0) return x * x;
  if (e == 0.5) return std::sqrt(x);
  return std::pow(x, e);
}

void require_interior(const ScalarField& u, std::size_t node, const char* what) {
  if (node >= u.size() || !u.grid().is_interior(node))
    throw InvalidArgument(std::string(what) + ": node " + std::to_string(node) +
                          " is not an interior node");
}

}  // namespace

EnvelopeMode EnvelopeMode::regularized(double eps_grad) {
  if (!(eps_grad > 0.0)) throw InvalidArgument("EnvelopeMode: eps_grad must be positive");
  return {Kind::Regularized, eps_grad};
}

const char* to_string(EnvelopeMode::Kind kind) {
  switch (kind) {
    case EnvelopeMode::Kind::Regularized:
      return "regularized";
    case EnvelopeMode::Kind::SubEnvelope:
      return "sub";
    case EnvelopeMode::Kind::SuperEnvelope:
      return "super";
  }
  return "?";
}

void validate(const ProblemParams& prm) {
  if (!(prm.p > 1.0)) throw InvalidArgument("problem: p must exceed 1");
  if (!(prm.theta > 0.0)) throw InvalidArgument("problem: theta must be positive");
  if (!std::isfinite(prm.sigma)) throw InvalidArgument("problem: sigma must be finite");
  if (!prm.regime_override && !(prm.theta < prm.sigma && prm.sigma < prm.theta + 1.0))
    throw InvalidArgument("problem: sigma must lie in (theta, theta + 1) unless regime_override");
  if (prm.henon_mode) {
    if (!(prm.m > 0.0))
      throw InvalidArgument("problem: Henon mode requires m > 0 (m = 0 indicator is unsupported)");
    if (!prm.regime_override && !(prm.m < 1.0 + prm.theta))
      throw InvalidArgument("problem: Henon mode requires m < 1 + theta");
  }
}

void ProblemSpec::validate() const {
  nplap::validate(params);
  if (!rho.grid_ptr() || !source.grid_ptr() || !drift.grid_ptr())
    throw InvalidArgument("problem: coefficient fields are not initialised");
  if (!(rho.grid() == source.grid()) || !(rho.grid() == drift.grid()))
    throw InvalidArgument("problem: coefficient fields live on different grids");
  if (!boundary) throw InvalidArgument("problem: missing boundary datum");
}

ProblemSpec make_problem(const GridPtr& grid, const ProblemParams& params,
                         const Coefficients& c, BoundarySampling sampling) {
  nplap::validate(params);
  ProblemSpec spec;
  spec.params = params;
  spec.boundary_sampling = sampling;
  const int n = grid->dim();
  spec.drift = c.drift ? sample_vector(c.drift, grid)
                       : sample_vector([n](const Vec&) { return Vec(Vec::Zero(n)); }, grid);
  spec.rho = sample(c.rho ? c.rho : ScalarFn([](const Vec&) { return 0.0; }), grid, "rho");
  spec.source = sample(c.source ? c.source : ScalarFn([](const Vec&) { return 0.0; }), grid,
                       params.henon_mode ? "weight" : "source");
  spec.boundary = c.boundary ? c.boundary : ScalarFn([](const Vec&) { return 0.0; });
  return spec;
}

double boundary_value(const ProblemSpec& spec, std::size_t node) {
  const Grid& g = spec.grid();
  return spec.boundary(spec.boundary_sampling == BoundarySampling::Nodal ? g.position(node)
                                                                          : g.project_to_sphere(node));
}

double ellipticity_lower(double p) { return std::min(1.0, p - 1.0); }
double ellipticity_upper(double p) { return std::max(1.0, p - 1.0); }

Vec gradient(const ScalarField& u, std::size_t node) {
  require_interior(u, node, "gradient");
  const Grid& g = u.grid();
  const double inv2h = 0.5 / g.spacing();
  Vec d(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    const std::size_t s = static_cast<std::size_t>(g.stride(a));
    d[a] = (u[node + s] - u[node - s]) * inv2h;
  }
  return d;
}

Mat hessian(const ScalarField& u, std::size_t node) {
  require_interior(u, node, "hessian");
  const Grid& g = u.grid();
  const int n = g.dim();
  const double h = g.spacing();
  const double inv_h2 = 1.0 / (h * h);
  const double inv_4h2 = 0.25 * inv_h2;
  const double c = u[node];
  Mat H(n, n);
  for (int a = 0; a < n; ++a) {
    const std::size_t sa = static_cast<std::size_t>(g.stride(a));
    H(a, a) = (u[node + sa] - 2.0 * c + u[node - sa]) * inv_h2;
    for (int b = a + 1; b < n; ++b) {
      const std::size_t sb = static_cast<std::size_t>(g.stride(b));
      const double v = (u[node + sa + sb] - u[node + sa - sb] - u[node - sa + sb] +
                        u[node - sa - sb]) *
                       inv_4h2;
      H(a, b) = v;
      H(b, a) = v;
    }
  }
  return H;
}

double degeneracy_modulus(const ScalarField& u, std::size_t node) {
  require_interior(u, node, "degeneracy_modulus");
  const Grid& g = u.grid();
  const double inv2h = 0.5 / g.spacing();
  double central2 = 0.0;
  double spread2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const std::size_t s = static_cast<std::size_t>(g.stride(a));
    const double fwd = u[node + s] - u[node];
    const double bwd = u[node] - u[node - s];
    const double c = (fwd + bwd) * inv2h;
    const double d = (fwd - bwd) * inv2h;
    central2 += c * c;
    spread2 += d * d;
  }
  return std::sqrt(std::max(central2, spread2));
}

Vec symmetric_eigenvalues(const Mat& m_in) {
  const Eigen::Index n = m_in.rows();
  if (m_in.cols() != n) throw InvalidArgument("eigenvalues: matrix is not square");
  const double scale = std::max(1.0, m_in.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(m_in(i, j) - m_in(j, i)) > 1e-12 * scale)
        throw InvalidArgument("eigenvalues: matrix is not symmetric");

  Mat a = 0.5 * (m_in + m_in.transpose());
  const double frob = a.norm();
  const double target = 1e-12 * std::max(frob, 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    if (std::sqrt(off) <= target) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  Vec ev = a.diagonal();
  std::sort(ev.data(), ev.data() + n);
  return ev;
}

std::pair<double, double> eig_extremes(const Mat& m) {
  const Vec ev = symmetric_eigenvalues(m);
  return {ev[0], ev[ev.size() - 1]};
}

double normalized_p_laplacian(const Vec& grad, const Mat& hess, double p,
                              const EnvelopeMode& mode) {
  if (!(p > 1.0)) throw InvalidArgument("normalized_p_laplacian: p must exceed 1");
  const double tr = hess.trace();
  const double norm = grad.norm();
  const double threshold = mode.kind == EnvelopeMode::Kind::Regularized ? mode.eps_grad : 0.0;
  if (norm > threshold) {
    const Vec nu = grad / norm;
    return tr + (p - 2.0) * nu.dot(hess * nu);
  }
  switch (mode.kind) {
    case EnvelopeMode::Kind::Regularized:
      // Direction average of <H nu, nu>; lies between the two envelope branches.
      return tr + (p - 2.0) * tr / static_cast<double>(hess.rows());
    case EnvelopeMode::Kind::SubEnvelope: {
      const auto [lo, hi] = eig_extremes(hess);
      return tr + (p - 2.0) * (p >= 2.0 ? hi : lo);
    }
    case EnvelopeMode::Kind::SuperEnvelope: {
      const auto [lo, hi] = eig_extremes(hess);
      return tr + (p - 2.0) * (p >= 2.0 ? lo : hi);
    }
  }
  return tr;
}

double pucci(const Mat& hess, double lambda, double Lambda, PucciSign sign) {
  if (!(lambda > 0.0) || !(lambda <= Lambda))
    throw InvalidArgument("pucci: requires 0 < lambda <= Lambda");
  const Vec ev = symmetric_eigenvalues(hess);
  double pos = 0.0, neg = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) (ev[i] > 0.0 ? pos : neg) += ev[i];
  return sign == PucciSign::Minus ? lambda * pos + Lambda * neg : Lambda * pos + lambda * neg;
}

double hamiltonian(const Vec& drift, double rho, const Vec& grad, double theta, double sigma) {
  const double norm = grad.norm();
  if (norm == 0.0) return 0.0;
  return drift.dot(grad) * power(norm, theta) + rho * power(norm, sigma);
}

double hamiltonian(std::size_t node, const Vec& grad, const ProblemSpec& spec) {
  return hamiltonian(spec.drift.at(node), spec.rho[node], grad, spec.params.theta,
                     spec.params.sigma);
}

double pointwise_residual(const Vec& grad, const Mat& hess, double modulus, double value,
                          const PointCoefficients& c, const ProblemParams& prm,
                          const EnvelopeMode& mode) {
  const double lap = normalized_p_laplacian(grad, hess, prm.p, mode);
  const double drift = c.drift.size() ? c.drift.dot(grad) : 0.0;
  double lhs = power(modulus, prm.theta) * (lap + drift);
  if (c.rho != 0.0) lhs += c.rho * power(modulus, prm.sigma);
  const double rhs = prm.henon_mode ? c.source * power(std::max(value, 0.0), prm.m) : c.source;
  return lhs - rhs;
}

NodeResidual residual_at(const ScalarField& u, const ProblemSpec& spec, const EnvelopeMode& mode,
                         std::size_t node, double grad_floor) {
  const Grid& g = u.grid();
  const ProblemParams& prm = spec.params;
  const Vec grad = gradient(u, node);
  const Mat hess = hessian(u, node);
  const double mod = degeneracy_modulus(u, node);
  const Vec b = spec.drift.at(node);
  const double rho = spec.rho[node];
  const double src = spec.source[node];
  const double h = g.spacing();

  double drift_term = 0.0;
  if (prm.upwind_drift) {
    for (int a = 0; a < g.dim(); ++a) {
      const std::size_t s = static_cast<std::size_t>(g.stride(a));
      const double d = b[a] >= 0.0 ? (u[node + s] - u[node]) / h : (u[node] - u[node - s]) / h;
      drift_term += b[a] * d;
    }
  } else {
    drift_term = b.dot(grad);
  }

  const double lap = normalized_p_laplacian(grad, hess, prm.p, mode);
  const double inner = lap + drift_term;
  double lhs = power(mod, prm.theta) * inner;
  if (rho != 0.0) lhs += rho * power(mod, prm.sigma);
  const double value = u[node];
  const double rhs = prm.henon_mode ? src * power(std::max(value, 0.0), prm.m) : src;

  NodeResidual out;
  out.value = lhs - rhs;
  out.modulus = mod;

  const double mf = std::max(mod, grad_floor);
  if (mf > 0.0) {
    // The second-difference branch of the modulus moves by sqrt(n)/h per unit of u[node].
    const double n = static_cast<double>(g.dim());
    const double dmod = std::sqrt(n) / h;
    out.stiffness = 2.0 * n * ellipticity_upper(prm.p) * power(mf, prm.theta) / (h * h) +
                    dmod * (prm.theta * std::pow(mf, prm.theta - 1.0) * std::abs(inner) +
                            prm.sigma * std::abs(rho) * std::pow(mf, prm.sigma - 1.0)) +
                    b.norm() * power(mf, prm.theta) / h;
  }
  out.rhs = rhs;
  if (prm.henon_mode && value > 0.0 && src != 0.0)
    out.absorption = prm.m * std::abs(src) * std::pow(value, prm.m - 1.0);
  return out;
}

ScalarField residual(const ScalarField& u, const ProblemSpec& spec, const EnvelopeMode& mode) {
  spec.validate();
  if (!(u.grid() == spec.grid())) throw InvalidArgument("residual: field and problem grids differ");
  ScalarField r(u.grid_ptr(), 0.0, "residual");
  const auto& nodes = u.grid().interior_nodes();
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(nodes.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const std::size_t node = nodes[static_cast<std::size_t>(k)];
    r[node] = residual_at(u, spec, mode, node).value;
  }
  r.check_finite();
  return r;
}

double default_eps_grad(const ScalarField& u) {
  return 1e-8 * (1.0 + u.sup_norm() / u.grid().spacing());
}

}  // namespace nplap
