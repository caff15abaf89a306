#pragma once

#include "nplap/grid.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nplap {

/// Least-squares fit of log value = log_intercept + exponent * log r.
struct FitResult {
  std::string kind;  // "growth" or "nondegeneracy"
  Vec x0;
  double center_value = 0.0;  // u(x0), multilinear
  double exponent = 0.0;
  double log_intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> radii;                         // strictly decreasing
  std::vector<std::pair<double, double>> samples;    // (r, value), value > 0
  std::size_t dropped = 0;                           // samples removed as nonpositive or noise
  std::optional<double> target;    // exponent used for the empirical constant
  std::optional<double> constant;  // min_r value / r^target
};

nlohmann::json to_json(const FitResult& fit);
/// "r,value" rows with 17 significant digits.
std::string to_csv(const FitResult& fit);

/// Dyadic radii 2^-first ... 2^-last scaled by `scale`.
std::vector<double> dyadic_radii(int first, int last, double scale = 1.0);

/// Plain least squares on (log r, log v); fills exponent, log_intercept, r_squared.
void fit_power_law(FitResult& fit);

/// Slope of log sup_{B_r(x0)} |u - u(x0)| against log r.
/// Throws NumericalError "insufficient decay data" with fewer than 4 usable samples.
FitResult growth_exponent(const ScalarField& u, const Vec& x0, const std::vector<double>& radii);

/// Slope of log sup_{dB_r(x0)} (u - u(x0))_+ against log r. The sphere is sampled by
/// interpolating u at radial projections of the lattice nodes in a shell of width h*sqrt(n).
/// Returns min_r value / r^target as the empirical constant.
FitResult nondegeneracy_curve(const ScalarField& u, const Vec& x0, const std::vector<double>& radii,
                              double target);

/// max |Du(x) - Du(y)| / |x - y|^alpha over node pairs inside `subdomain`.
/// Pairs: every node against its axis neighbours at dyadic distances 2^j h, plus up to
/// 1000 seeded random pairs per distance decade [10^k h, 10^{k+1} h).
/// Throws NumericalError with fewer than 100 pairs.
double holder_gradient_seminorm(const ScalarField& u, double alpha, const Ball& subdomain,
                                std::uint64_t seed = 0);

enum class Positivity { IdenticallyZero, StrictlyPositive, Mixed };

const char* to_string(Positivity p);

struct PositivityReport {
  Positivity classification = Positivity::Mixed;
  double tol = 0.0;
  double min_interior = 0.0;
  double sup_abs = 0.0;
  std::vector<std::size_t> dead_core;        // Interior nodes with u <= tol (Mixed only)
  std::vector<std::size_t> free_boundary;    // lower-corner node of each sign-change cell
};

PositivityReport positivity_report(const ScalarField& u, double tol);

nlohmann::json to_json(const PositivityReport& rep, const Grid& grid);

/// min over samples x = z + t e (e the unit vector toward x0, t = L k / samples, k = 1..samples)
/// of u(x) / (r - |x - x0|). L defaults to r.
double hopf_slope(const ScalarField& u, const Vec& z, const Vec& x0, double r, int samples = 16,
                  std::optional<double> segment_length = std::nullopt);

/// First point along the ray origin + t e (t > 0, e normalised) where the multilinear
/// interpolant of u rises from <= tol to > tol, refined by bisection to 1e-12 h.
/// Throws NumericalError when the ray never crosses.
Vec free_boundary_point(const ScalarField& u, const Vec& origin, const Vec& direction, double tol);

enum class Extremum { Min, Max };

/// Interior node with the extreme value, refined by a per-axis parabolic vertex.
Vec locate_extremum(const ScalarField& u, Extremum kind);

}  // namespace nplap
