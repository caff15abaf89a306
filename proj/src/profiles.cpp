#include "nplap/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nplap {

namespace {

// s_+^e with the 0^0 = 1 convention; negative exponents give 0 on s <= 0.
double positive_power(double s, double e) {
  if (s > 0.0) return e == 0.0 ? 1.0 : std::pow(s, e);
  return e == 0.0 ? 1.0 : 0.0;
}

Vec unit(int n, int axis) {
  Vec e = Vec::Zero(n);
  e[axis] = 1.0;
  return e;
}

// Gradient and Hessian of a radial function phi(|x - c|) at x != c.
void radial_derivatives(const Vec& x, const Vec& c, double d1, double d2, Vec* g, Mat* H) {
  const Vec d = x - c;
  const double rho = d.norm();
  const Vec e = d / rho;
  const int n = static_cast<int>(x.size());
  if (g) *g = d1 * e;
  if (H) {
    const Mat ee = e * e.transpose();
    *H = d2 * ee + (d1 / rho) * (Mat::Identity(n, n) - ee);
  }
}

bool sigma_in_sublinear_range(double theta, double sigma) {
  return theta < sigma && sigma < theta + 1.0;
}

}  // namespace

const char* to_string(Claim c) {
  switch (c) {
    case Claim::Solution:
      return "solution";
    case Claim::NegativeResidual:
      return "negative-residual";
    case Claim::PositiveResidual:
      return "positive-residual";
  }
  return "?";
}

double AnalyticProfile::exact_residual(const Vec& x, const EnvelopeMode& mode) const {
  if (!has_derivatives()) throw InvalidArgument("profile " + name + " has no exact derivatives");
  const Vec g = grad(x);
  const Mat H = hess(x);
  PointCoefficients c;
  c.drift = coefficients.drift ? coefficients.drift(x) : Vec(Vec::Zero(dim));
  c.rho = coefficients.rho ? coefficients.rho(x) : 0.0;
  c.source = coefficients.source ? coefficients.source(x) : 0.0;
  return pointwise_residual(g, H, g.norm(), value(x), c, params, mode);
}

HenonConstants henon_constants(double theta, double p, double m, double sigma) {
  if (!(p > 1.0)) throw InvalidArgument("henon_constants: p must exceed 1");
  if (!(theta > 0.0)) throw InvalidArgument("henon_constants: theta must be positive");
  if (!(m >= 0.0)) throw InvalidArgument("henon_constants: m must be non-negative");
  if (!(m < 1.0 + theta))
    throw InvalidArgument("henon_constants: m must be below 1 + theta (exponent blow-up)");
  HenonConstants k;
  k.beta_hat = (2.0 + theta) / (1.0 + theta - m);
  k.c_profile =
      (1.0 / k.beta_hat) / std::pow((p - 1.0) * (k.beta_hat - 1.0) + 1.0, 1.0 / (1.0 + theta));
  k.sigma_constraint_ok = sigma <= m * (2.0 + theta) / (m + 1.0);
  k.m_lower_bound_ok = m > theta / 2.0;
  return k;
}

HenonProfile profile_henon(int n, double theta, double p, double m, double sigma, double r,
                           double R, const Vec& x0, HenonWeight weight) {
  if (!(r > 0.0) || !(r < R)) throw InvalidArgument("profile_henon: requires 0 < r < R");
  if (x0.size() != n) throw InvalidArgument("profile_henon: center has wrong dimension");
  const HenonConstants k = henon_constants(theta, p, m, sigma);
  const double beta = k.beta_hat;
  const double c = k.c_profile;
  const double rho_exp = (beta - 1.0) * (1.0 + theta - sigma) - 1.0;
  const double rho_scale = std::pow(c * beta, 1.0 + theta - sigma);
  const double w = weight == HenonWeight::Exact ? std::pow(c, -m) : 1.0;

  HenonProfile out;
  out.constants = k;
  out.x0 = x0;
  out.r = r;
  AnalyticProfile& P = out.profile;
  P.name = "henon";
  P.dim = n;
  P.domain = Ball{x0, R};
  P.value = [=](const Vec& x) { return c * positive_power((x - x0).norm() - r, beta); };
  P.grad = [=](const Vec& x) {
    const double s = (x - x0).norm() - r;
    Vec g = Vec::Zero(n);
    if (s > 0.0) radial_derivatives(x, x0, c * beta * std::pow(s, beta - 1.0), 0.0, &g, nullptr);
    return g;
  };
  P.hess = [=](const Vec& x) {
    const double s = (x - x0).norm() - r;
    Mat H = Mat::Zero(n, n);
    if (s > 0.0)
      radial_derivatives(x, x0, c * beta * std::pow(s, beta - 1.0),
                         c * beta * (beta - 1.0) * std::pow(s, beta - 2.0), nullptr, &H);
    return H;
  };
  P.params.p = p;
  P.params.theta = theta;
  P.params.sigma = sigma;
  P.params.m = m;
  P.params.henon_mode = m > 0.0;
  P.params.regime_override = !sigma_in_sublinear_range(theta, sigma);
  P.coefficients.drift = [=](const Vec& x) {
    const Vec d = x - x0;
    const double rho = d.norm();
    if (rho > r) return Vec(-(n - 1.0) * d / (rho * rho));
    return Vec(-(n - 1.0) * d / (r * r));
  };
  P.coefficients.rho = [=](const Vec& x) {
    return rho_scale * positive_power((x - x0).norm() - r, rho_exp);
  };
  P.coefficients.source = [=](const Vec&) { return w; };
  P.coefficients.boundary = P.value;
  P.claim = Claim::Solution;
  P.valid = [=](const Vec& x) {
    const double rho = (x - x0).norm();
    return rho > r && rho < R;
  };
  P.singular_distance = [=](const Vec& x) { return std::abs((x - x0).norm() - r); };
  return out;
}

NonUniquenessProfiles profile_nonuniqueness(int n, double theta, double p, double sigma) {
  if (!sigma_in_sublinear_range(theta, sigma))
    throw InvalidArgument("profile_nonuniqueness: requires theta < sigma < 1 + theta");
  NonUniquenessProfiles out;
  const double beta = (2.0 + theta) / (1.0 + theta);
  const double c = 1.0 / beta;
  out.beta = beta;
  out.c = c;

  Coefficients coeffs;
  coeffs.drift = [=](const Vec& x) { return Vec((p - 2.0) / (1.0 + theta) * x.norm() * x); };
  coeffs.rho = [=](const Vec& x) {
    return (n + (n - 1.0) * theta) / (1.0 + theta) * std::pow(x.norm(), 1.0 + theta - sigma);
  };
  coeffs.source = [](const Vec&) { return 0.0; };
  coeffs.boundary = [](const Vec&) { return 0.0; };

  ProblemParams prm;
  prm.p = p;
  prm.theta = theta;
  prm.sigma = sigma;

  const Vec origin = Vec::Zero(n);
  auto base = [&](const char* name) {
    AnalyticProfile P;
    P.name = name;
    P.dim = n;
    P.domain = Ball{origin, 1.0};
    P.params = prm;
    P.coefficients = coeffs;
    P.claim = Claim::Solution;
    P.valid = [](const Vec& x) {
      const double s = x.norm();
      return s > 0.0 && s < 1.0;
    };
    P.singular_distance = [](const Vec& x) { return x.norm(); };
    return P;
  };

  out.zero = base("nonuniqueness-zero");
  out.zero.value = [](const Vec&) { return 0.0; };
  out.zero.grad = [n](const Vec&) { return Vec(Vec::Zero(n)); };
  out.zero.hess = [n](const Vec&) { return Mat(Mat::Zero(n, n)); };

  out.v = base("nonuniqueness");
  out.v.value = [=](const Vec& x) { return c * (1.0 - std::pow(x.norm(), beta)); };
  out.v.grad = [=](const Vec& x) {
    Vec g;
    const double s = x.norm();
    radial_derivatives(x, origin, -c * beta * std::pow(s, beta - 1.0), 0.0, &g, nullptr);
    return g;
  };
  out.v.hess = [=](const Vec& x) {
    Mat H;
    const double s = x.norm();
    radial_derivatives(x, origin, -c * beta * std::pow(s, beta - 1.0),
                       -c * beta * (beta - 1.0) * std::pow(s, beta - 2.0), nullptr, &H);
    return H;
  };
  out.zero.coefficients.boundary = out.zero.value;
  out.v.coefficients.boundary = out.v.value;
  return out;
}

PowerProfile profile_power(int n, int axis, double p, double alpha, double theta, double sigma) {
  if (!(p > 1.0)) throw InvalidArgument("profile_power: p must exceed 1");
  if (!(theta > 0.0)) throw InvalidArgument("profile_power: theta must be positive");
  if (axis < 0 || axis >= n) throw InvalidArgument("profile_power: axis out of range");
  PowerProfile out;
  const double gamma = (2.0 + alpha + theta) / (1.0 + theta);
  const double coef = std::pow(1.0 + theta, theta / (1.0 + theta)) *
                      std::pow((1.0 + alpha) * (p - 1.0), 1.0 / (1.0 + theta)) /
                      (2.0 + theta + alpha);
  out.exponent = gamma;
  out.coefficient = coef;
  out.axis = axis;
  out.alpha_admissible = (1.0 + theta - sigma) > 0.0 && alpha >= sigma / (1.0 + theta - sigma);

  AnalyticProfile& P = out.profile;
  P.name = "power";
  P.dim = n;
  P.domain = Ball{Vec::Zero(n), 1.0};
  P.value = [=](const Vec& x) { return coef * std::pow(std::abs(x[axis]), gamma); };
  P.grad = [=](const Vec& x) {
    Vec g = Vec::Zero(n);
    const double t = std::abs(x[axis]);
    if (t > 0.0) g[axis] = coef * gamma * std::pow(t, gamma - 1.0) * (x[axis] > 0 ? 1.0 : -1.0);
    return g;
  };
  P.hess = [=](const Vec& x) {
    Mat H = Mat::Zero(n, n);
    const double t = std::abs(x[axis]);
    if (t > 0.0) H(axis, axis) = coef * gamma * (gamma - 1.0) * std::pow(t, gamma - 2.0);
    return H;
  };
  P.params.p = p;
  P.params.theta = theta;
  P.params.sigma = sigma;
  P.params.regime_override = !sigma_in_sublinear_range(theta, sigma);
  const double cg = coef * gamma;
  const double rho_exp = alpha - (1.0 + alpha) / (1.0 + theta) * sigma;
  P.coefficients.drift = [=](const Vec&) { return Vec(std::pow(cg, -(1.0 + theta)) * unit(n, axis)); };
  P.coefficients.rho = [=](const Vec& x) {
    const double t = std::abs(x[axis]);
    if (t == 0.0) return rho_exp == 0.0 ? std::pow(cg, -sigma) : 0.0;
    return std::pow(cg, -sigma) * std::pow(t, rho_exp);
  };
  P.coefficients.source = [=](const Vec& x) {
    const double t = std::abs(x[axis]);
    return 2.0 * std::pow(t, alpha) + x[axis] * std::pow(t, 1.0 + alpha);
  };
  P.coefficients.boundary = P.value;
  P.claim = Claim::Solution;
  P.valid = [=](const Vec& x) { return x[axis] != 0.0 && x.norm() < 1.0; };
  P.singular_distance = [=](const Vec& x) { return std::abs(x[axis]); };
  return out;
}

double nondeg_kappa_bound(double theta, double p, double sigma, int n, double c0, Regime regime,
                          double drift_norm, double rho_norm) {
  if (!(c0 > 0.0)) throw InvalidArgument("barrier_nondeg: c0 must be positive");
  const double beta = (2.0 + theta) / (1.0 + theta);
  const double bracket = n - 1.0 + (beta - 1.0) * (p - 1.0) + drift_norm +
                         std::pow(beta, sigma - (1.0 + theta)) * rho_norm;
  if (regime == Regime::Sublinear)
    return std::min(1.0, std::pow(c0, 1.0 / theta) /
                             (std::pow(beta, (1.0 + theta) / theta) *
                              std::pow(bracket, 1.0 / theta)));
  return std::min(1.0, std::pow(c0, 1.0 / (1.0 + theta)) /
                           (beta * std::pow(bracket, 1.0 / (1.0 + theta))));
}

NondegBarrier barrier_nondeg(double kappa, double theta, double p, double sigma, int n, double c0,
                             Regime regime, double drift_norm, double rho_norm) {
  NondegBarrier out;
  const double beta = (2.0 + theta) / (1.0 + theta);
  out.beta = beta;
  out.kappa = kappa;
  out.kappa_bound = nondeg_kappa_bound(theta, p, sigma, n, c0, regime, drift_norm, rho_norm);

  const Vec origin = Vec::Zero(n);
  AnalyticProfile& P = out.profile;
  P.name = "barrier-nondeg";
  P.dim = n;
  P.domain = Ball{origin, 1.0};
  P.value = [=](const Vec& x) { return kappa * std::pow(x.norm(), beta); };
  // grad = kappa beta |x|^{beta-2} x ; D^2 = kappa beta |x|^{beta-2} [Id - (2 - beta) e (x) e]
  P.grad = [=](const Vec& x) { return Vec(kappa * beta * std::pow(x.norm(), beta - 2.0) * x); };
  P.hess = [=](const Vec& x) {
    const double s = x.norm();
    const Vec e = x / s;
    return Mat(kappa * beta * std::pow(s, beta - 2.0) *
               (Mat::Identity(n, n) - (2.0 - beta) * e * e.transpose()));
  };
  P.params.p = p;
  P.params.theta = theta;
  P.params.sigma = sigma;
  P.params.regime_override = !sigma_in_sublinear_range(theta, sigma);
  P.coefficients.drift = [=](const Vec&) { return Vec(drift_norm * unit(n, 0)); };
  P.coefficients.rho = [=](const Vec&) { return rho_norm; };
  P.coefficients.source = [=](const Vec&) { return c0; };
  P.coefficients.boundary = P.value;
  P.claim = Claim::NegativeResidual;
  P.valid = [](const Vec& x) { return x.norm() > 0.0; };
  P.singular_distance = [](const Vec& x) { return x.norm(); };
  P.check_region = [](const Vec& x) {
    const double s = x.norm();
    return s >= 0.1 && s <= 0.9;
  };
  return out;
}

AnalyticProfile barrier_hopf(double alpha_h, double r, int n, double theta, double p) {
  if (!(alpha_h > 0.0) || !(r > 0.0)) throw InvalidArgument("barrier_hopf: requires alpha, r > 0");
  const double floor_value = std::exp(-alpha_h * r * r);
  AnalyticProfile P;
  P.name = "barrier-hopf";
  P.dim = n;
  P.domain = Ball{Vec::Zero(n), 2.0 * r};
  P.value = [=](const Vec& x) { return std::exp(-alpha_h * x.squaredNorm()) - floor_value; };
  P.grad = [=](const Vec& x) {
    return Vec(-2.0 * alpha_h * std::exp(-alpha_h * x.squaredNorm()) * x);
  };
  P.hess = [=](const Vec& x) {
    const double E = std::exp(-alpha_h * x.squaredNorm());
    return Mat(E * (4.0 * alpha_h * alpha_h * x * x.transpose() -
                    2.0 * alpha_h * Mat::Identity(n, n)));
  };
  P.params.p = p;
  P.params.theta = theta;
  P.params.sigma = theta + 0.5;
  P.coefficients.drift = [n](const Vec&) { return Vec(Vec::Zero(n)); };
  P.coefficients.rho = [](const Vec&) { return 0.0; };
  P.coefficients.source = [](const Vec&) { return 0.0; };
  P.coefficients.boundary = P.value;
  P.claim = Claim::PositiveResidual;
  P.valid = [](const Vec&) { return true; };
  P.singular_distance = [](const Vec& x) { return x.norm(); };
  P.check_region = [r](const Vec& x) {
    const double s = x.norm();
    return s >= 0.5 * r && s <= r;
  };
  return P;
}

ReferenceExponents reference_exponents(double p, double theta) {
  if (!(p > 1.0)) throw InvalidArgument("reference_exponents: p must exceed 1");
  ReferenceExponents e;
  e.p = p;
  e.theta = theta;
  const double q = 1.0 / (p - 1.0);
  e.p_prime = 1.0 + q;
  e.lambda = ellipticity_lower(p);
  e.Lambda = ellipticity_upper(p);
  e.sharp_total = (7.0 + q + std::sqrt(1.0 + 14.0 * q + q * q)) / 6.0;
  e.alpha_sharp = e.sharp_total - (std::ceil(e.sharp_total) - 1.0);
  e.alpha_star = (-3.0 - q + std::sqrt(33.0 + 30.0 * q + q * q)) / (2.0 * p);
  e.critical_growth = 1.0 + 1.0 / (1.0 + theta);
  e.planar_exponents_meaningful = p > 2.0;
  return e;
}

ProfileCheck verify_profile(const AnalyticProfile& P, double h_coarse, std::size_t max_entries) {
  if (!P.has_derivatives()) throw InvalidArgument("verify_profile: profile lacks derivatives");
  ProfileCheck out;
  out.name = P.name;
  out.claim = P.claim;
  out.h_coarse = h_coarse;
  out.h_fine = 0.5 * h_coarse;
  const double margin = 3.0 * h_coarse;

  bool claim_holds = true;
  struct Level {
    double err = 0.0, discrete = 0.0;
    std::size_t nodes = 0;
  };
  std::vector<DiscrepancyEntry> candidates;

  auto run = [&](double h) {
    Level lv;
    const GridPtr grid = build_grid(P.dim, h, P.domain.center, P.domain.radius);
    const ScalarField u = sample(P.value, grid, P.name);
    const ProblemSpec spec = make_problem(grid, P.params, P.coefficients);
    const EnvelopeMode mode = EnvelopeMode::regularized(default_eps_grad(u));
    for (std::size_t node : grid->interior_nodes()) {
      const Vec x = grid->position(node);
      if (P.valid && !P.valid(x)) continue;
      if (P.singular_distance && P.singular_distance(x) < margin) continue;
      if (P.check_region && !P.check_region(x)) continue;
      const double rh = residual_at(u, spec, mode, node).value;
      const double rx = P.exact_residual(x, mode);
      ++lv.nodes;
      lv.err = std::max(lv.err, std::abs(rh - rx));
      lv.discrete = std::max(lv.discrete, std::abs(rh));
      out.exact_residual_max = std::max(out.exact_residual_max, std::abs(rx));
      bool bad = false;
      switch (P.claim) {
        case Claim::Solution: {
          PointCoefficients c;
          c.source = P.coefficients.source ? P.coefficients.source(x) : 0.0;
          bad = std::abs(rx) > 1e-8 * (1.0 + std::abs(c.source));
          break;
        }
        case Claim::NegativeResidual:
          bad = !(rx < 0.0) || !(rh < 0.0);
          break;
        case Claim::PositiveResidual:
          bad = !(rx > 0.0) || !(rh > 0.0);
          break;
      }
      if (bad) claim_holds = false;
      candidates.push_back({P.name, node, x, rx, rh, h});
    }
    return lv;
  };

  const Level coarse = run(out.h_coarse);
  const std::size_t coarse_count = candidates.size();
  const Level fine = run(out.h_fine);
  out.nodes_coarse = coarse.nodes;
  out.nodes_fine = fine.nodes;
  out.consistency_error_coarse = coarse.err;
  out.consistency_error_fine = fine.err;
  out.discrete_residual_coarse = coarse.discrete;
  out.discrete_residual_fine = fine.discrete;
  if (coarse.nodes == 0 || fine.nodes == 0) {
    out.note = "no nodes in the verification region";
    claim_holds = false;
  }
  constexpr double kRoundoff = 1e-12;
  if (fine.err <= kRoundoff * (1.0 + out.exact_residual_max)) {
    out.observed_order = 99.0;
    out.note = "consistency error at round-off level";
  } else {
    out.observed_order = std::log2(std::max(coarse.err, 1e-300) / fine.err);
  }
  out.claim_holds = claim_holds;
  out.passed = claim_holds && out.observed_order >= 1.0;
  out.verdict = out.passed ? "PASS" : "DISCREPANCY";
  if (!claim_holds && coarse.nodes > 0 && fine.nodes > 0)
    out.note = std::string("claimed ") + to_string(P.claim) +
               " not reproduced by the exact-derivative residual";
  else if (claim_holds && !out.passed && out.note.empty())
    out.note = "observed consistency order below 1";

  // Worst entries per level: by exact residual for failed claims, by consistency error otherwise.
  auto key = [&](const DiscrepancyEntry& e) {
    return claim_holds ? std::abs(e.discrete_residual - e.residual) : std::abs(e.residual);
  };
  auto take = [&](std::vector<DiscrepancyEntry>::iterator first,
                  std::vector<DiscrepancyEntry>::iterator last) {
    const std::size_t k = std::min<std::size_t>(max_entries / 2 + max_entries % 2,
                                                static_cast<std::size_t>(last - first));
    std::partial_sort(first, first + static_cast<std::ptrdiff_t>(k), last,
                      [&](const auto& a, const auto& b) {
                        if (key(a) != key(b)) return key(a) > key(b);
                        return a.node < b.node;
                      });
    out.entries.insert(out.entries.end(), first, first + static_cast<std::ptrdiff_t>(k));
  };
  take(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(coarse_count));
  take(candidates.begin() + static_cast<std::ptrdiff_t>(coarse_count), candidates.end());
  return out;
}

nlohmann::json to_json(const ProfileCheck& c) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : c.entries) {
    std::vector<double> pos(e.position.data(), e.position.data() + e.position.size());
    entries.push_back({{"profile", e.profile},
                       {"node", e.node},
                       {"position", pos},
                       {"residual", e.residual},
                       {"discrete_residual", e.discrete_residual},
                       {"h", e.h}});
  }
  return {{"profile", c.name},
          {"claim", to_string(c.claim)},
          {"h_coarse", c.h_coarse},
          {"h_fine", c.h_fine},
          {"nodes_coarse", c.nodes_coarse},
          {"nodes_fine", c.nodes_fine},
          {"consistency_error_coarse", c.consistency_error_coarse},
          {"consistency_error_fine", c.consistency_error_fine},
          {"observed_order", c.observed_order},
          {"discrete_residual_coarse", c.discrete_residual_coarse},
          {"discrete_residual_fine", c.discrete_residual_fine},
          {"exact_residual_max", c.exact_residual_max},
          {"claim_holds", c.claim_holds},
          {"verdict", c.verdict},
          {"note", c.note},
          {"entries", entries}};
}

nlohmann::json to_json(const ReferenceExponents& e) {
  return {{"p", e.p},
          {"theta", e.theta},
          {"p_prime", e.p_prime},
          {"lambda", e.lambda},
          {"Lambda", e.Lambda},
          {"sharp_total", e.sharp_total},
          {"alpha_sharp", e.alpha_sharp},
          {"alpha_star", e.alpha_star},
          {"critical_growth", e.critical_growth},
          {"planar_exponents_meaningful", e.planar_exponents_meaningful}};
}

}  // namespace nplap
