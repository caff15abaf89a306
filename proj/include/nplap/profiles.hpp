#pragma once

#include "nplap/operator.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace nplap {

/// What an analytic profile is claimed to satisfy against its own coefficients.
enum class Claim {
  Solution,          // residual vanishes on the validity region
  NegativeResidual,  // residual < 0 on the check region (barrier from above)
  PositiveResidual,  // residual > 0 on the check region (barrier from below)
};

const char* to_string(Claim c);

/// Exact function with derivative oracles and the coefficient fields it is paired with.
struct AnalyticProfile {
  std::string name;
  int dim = 2;
  ScalarFn value;
  VectorFn grad;  // may be empty
  MatrixFn hess;  // may be empty
  ProblemParams params;
  Coefficients coefficients;  // boundary datum is the profile itself
  Claim claim = Claim::Solution;
  /// Points where grad/hess are valid (excludes singular sets).
  std::function<bool(const Vec&)> valid;
  /// Distance to the singular set; used to keep verification away from it.
  ScalarFn singular_distance;
  /// Optional restriction of the region where the claim is checked.
  std::function<bool(const Vec&)> check_region;
  /// Domain the profile lives on.
  Ball domain;

  bool has_derivatives() const { return static_cast<bool>(grad) && static_cast<bool>(hess); }
  /// Residual from the exact derivatives (modulus = |grad|).
  double exact_residual(const Vec& x, const EnvelopeMode& mode) const;
};

struct HenonConstants {
  double beta_hat = 0.0;
  double c_profile = 0.0;
  bool sigma_constraint_ok = false;  // sigma <= m (2 + theta) / (m + 1)
  bool m_lower_bound_ok = false;     // m > theta / 2
};

/// beta_hat = (2 + theta) / (1 + theta - m), c = [(p-1)(beta_hat-1)+1]^{-1/(1+theta)} / beta_hat.
/// `sigma` only feeds the constraint flags. Throws for m >= 1 + theta.
HenonConstants henon_constants(double theta, double p, double m, double sigma = 0.0);

/// Right-hand-side weight paired with the Henon profile.
enum class HenonWeight {
  Printed,  // frak_f == 1
  Exact,    // frak_f == c^{-m}; makes the profile an exact solution for every m
};

struct HenonProfile {
  AnalyticProfile profile;
  HenonConstants constants;
  Vec x0;
  double r = 0.0;
};

/// Dead-core radial profile c (|x - x0| - r)_+^beta_hat on B_R(x0) with its two-branch
/// drift and the matching rho. For m = 0 the problem is posed in standard mode with f == 1.
HenonProfile profile_henon(int n, double theta, double p, double m, double sigma, double r,
                           double R, const Vec& x0, HenonWeight weight = HenonWeight::Printed);

struct NonUniquenessProfiles {
  AnalyticProfile zero;
  AnalyticProfile v;  // c (1 - |x|^beta), beta = (2+theta)/(1+theta), c = 1/beta
  double beta = 0.0;
  double c = 0.0;
};

/// Two candidate solutions of the homogeneous Dirichlet problem on B_1 with
/// B(x) = (p-2)/(1+theta) |x| x and rho(x) = (n + (n-1) theta)/(1+theta) |x|^{1+theta-sigma}.
NonUniquenessProfiles profile_nonuniqueness(int n, double theta, double p, double sigma);

struct PowerProfile {
  AnalyticProfile profile;
  double exponent = 0.0;      // (2 + alpha + theta) / (1 + theta)
  double coefficient = 0.0;
  bool alpha_admissible = false;  // alpha >= sigma / (1 + theta - sigma)
  int axis = 0;
};

/// c |x_axis|^{(2+alpha+theta)/(1+theta)} paired with the claimed right-hand side
/// 2|x_i|^alpha + x_i |x_i|^{1+alpha}; singular set {x_axis = 0}.
PowerProfile profile_power(int n, int axis, double p, double alpha, double theta, double sigma);

enum class Regime { Sublinear, Superlinear };

struct NondegBarrier {
  AnalyticProfile profile;
  double beta = 0.0;
  double kappa = 0.0;
  double kappa_bound = 0.0;  // admissible upper bound for the requested regime
};

/// kappa |x|^beta, beta = (2+theta)/(1+theta), against f == c0 with constant drift of
/// norm `drift_norm` along e_1 and constant rho == rho_norm.
NondegBarrier barrier_nondeg(double kappa, double theta, double p, double sigma, int n, double c0,
                             Regime regime, double drift_norm = 0.0, double rho_norm = 0.0);

/// Upper bound on kappa that makes kappa |x|^beta a strict barrier for f >= c0.
double nondeg_kappa_bound(double theta, double p, double sigma, int n, double c0, Regime regime,
                          double drift_norm, double rho_norm);

/// exp(-a|x|^2) - exp(-a r^2), zero on |x| = r, paired with zero coefficients.
/// Claimed positive residual on r/2 <= |x| <= r once a is large.
AnalyticProfile barrier_hopf(double alpha_h, double r, int n = 2, double theta = 1.0,
                             double p = 2.0);

struct ReferenceExponents {
  double p = 0.0;
  double theta = 0.0;
  double p_prime = 0.0;
  double lambda = 0.0;
  double Lambda = 0.0;
  double sharp_total = 0.0;   // k + alpha_sharp
  double alpha_sharp = 0.0;   // fractional part in (0, 1]
  double alpha_star = 0.0;
  double critical_growth = 0.0;  // 1 + 1/(1+theta)
  bool planar_exponents_meaningful = false;  // p > 2
};

ReferenceExponents reference_exponents(double p, double theta);

// ---------------------------------------------------------------------------
// Verification against the discrete operator

struct DiscrepancyEntry {
  std::string profile;
  std::size_t node = 0;
  Vec position;
  double residual = 0.0;  // exact-derivative residual at the node
  double discrete_residual = 0.0;
  double h = 0.0;
};

struct ProfileCheck {
  std::string name;
  Claim claim = Claim::Solution;
  double h_coarse = 0.0;
  double h_fine = 0.0;
  std::size_t nodes_coarse = 0;
  std::size_t nodes_fine = 0;
  double consistency_error_coarse = 0.0;  // max |R_h - R_exact|
  double consistency_error_fine = 0.0;
  double observed_order = 0.0;
  double discrete_residual_coarse = 0.0;  // max |R_h|
  double discrete_residual_fine = 0.0;
  double exact_residual_max = 0.0;        // max |R_exact|
  bool claim_holds = false;
  bool passed = false;
  std::string verdict;  // "PASS" or "DISCREPANCY"
  std::string note;
  std::vector<DiscrepancyEntry> entries;
};

/// Compares the sampled profile's discrete residual with the exact-derivative residual
/// at spacings h and h/2 on nodes at distance >= 3h from the singular set.
ProfileCheck verify_profile(const AnalyticProfile& profile, double h_coarse,
                            std::size_t max_entries = 20);

nlohmann::json to_json(const ProfileCheck& check);
nlohmann::json to_json(const ReferenceExponents& e);

}  // namespace nplap
