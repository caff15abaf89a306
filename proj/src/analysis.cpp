#include "nplap/analysis.hpp"

#include "nplap/operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace nplap {

namespace {

std::vector<double> decreasing_radii(const std::vector<double>& radii) {
  std::vector<double> r = radii;
  for (double v : r)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("fit: radii must be positive");
  std::sort(r.begin(), r.end(), std::greater<>());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

double noise_floor(const ScalarField& u) {
  return 10.0 * std::numeric_limits<double>::epsilon() * u.sup_norm();
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::vector<double> dyadic_radii(int first, int last, double scale) {
  if (first > last) throw InvalidArgument("dyadic_radii: first exponent exceeds last");
  std::vector<double> r;
  for (int k = first; k <= last; ++k) r.push_back(scale * std::ldexp(1.0, -k));
  return r;
}

void fit_power_law(FitResult& fit) {
  const std::size_t n = fit.samples.size();
  if (n < 2) throw NumericalError("insufficient decay data");
  double sx = 0.0, sy = 0.0;
  for (const auto& [r, v] : fit.samples) {
    sx += std::log(r);
    sy += std::log(v);
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [r, v] : fit.samples) {
    const double dx = std::log(r) - mx;
    const double dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw NumericalError("insufficient decay data");
  fit.exponent = sxy / sxx;
  fit.log_intercept = my - fit.exponent * mx;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  } else {
    const double ss_res = std::max(0.0, syy - fit.exponent * sxy);
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
}

FitResult growth_exponent(const ScalarField& u, const Vec& x0, const std::vector<double>& radii) {
  FitResult fit;
  fit.kind = "growth";
  fit.x0 = x0;
  fit.radii = decreasing_radii(radii);
  fit.center_value = interpolate(u, x0);
  const double floor = noise_floor(u);
  for (double r : fit.radii) {
    const auto nodes = nodes_in_ball(u.grid(), x0, r);
    if (nodes.empty())
      throw InvalidArgument("growth_exponent: ball of radius " + std::to_string(r) +
                            " contains no nodes");
    double v = 0.0;
    for (std::size_t node : nodes) v = std::max(v, std::abs(u[node] - fit.center_value));
    if (v > floor && v > 0.0) fit.samples.emplace_back(r, v);
    else ++fit.dropped;
  }
  if (fit.samples.size() < 4) throw NumericalError("insufficient decay data");
  fit_power_law(fit);
  return fit;
}

FitResult nondegeneracy_curve(const ScalarField& u, const Vec& x0, const std::vector<double>& radii,
                              double target) {
  FitResult fit;
  fit.kind = "nondegeneracy";
  fit.x0 = x0;
  fit.radii = decreasing_radii(radii);
  fit.center_value = interpolate(u, x0);
  fit.target = target;
  const Grid& g = u.grid();
  const double band = g.spacing() * std::sqrt(static_cast<double>(g.dim()));
  const double floor = noise_floor(u);
  for (double r : fit.radii) {
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t node : nodes_in_ball(g, x0, r + band)) {
      const Vec d = g.position(node) - x0;
      const double rho = d.norm();
      if (rho == 0.0 || std::abs(rho - r) > band) continue;
      const auto v = try_interpolate(u, x0 + (r / rho) * d);
      if (!v) continue;
      any = true;
      best = std::max(best, *v - fit.center_value);
    }
    if (!any)
      throw InvalidArgument("nondegeneracy_curve: sphere of radius " + std::to_string(r) +
                            " has no interpolable points");
    if (best > floor && best > 0.0) fit.samples.emplace_back(r, best);
    else ++fit.dropped;
  }
  if (fit.samples.empty()) throw NumericalError("all shell values nonpositive");
  if (fit.samples.size() < 4) throw NumericalError("insufficient decay data");
  fit_power_law(fit);
  double c = std::numeric_limits<double>::infinity();
  for (const auto& [r, v] : fit.samples) c = std::min(c, v / std::pow(r, target));
  fit.constant = c;
  return fit;
}

double holder_gradient_seminorm(const ScalarField& u, double alpha, const Ball& subdomain,
                                std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidArgument("holder_gradient_seminorm: alpha must lie in [0, 1]");
  const Grid& g = u.grid();
  const int n = g.dim();
  const double h = g.spacing();
  std::vector<std::size_t> nodes;
  for (std::size_t node : nodes_in_ball(g, subdomain.center, subdomain.radius))
    if (g.is_interior(node)) nodes.push_back(node);
  if (nodes.size() < 2 || nodes.size() * (nodes.size() - 1) / 2 < 100)
    throw NumericalError("holder_gradient_seminorm: insufficient pairs");

  std::vector<int> slot(g.node_count(), -1);
  std::vector<double> grads(nodes.size() * static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    slot[nodes[k]] = static_cast<int>(k);
    const Vec d = gradient(u, nodes[k]);
    for (int a = 0; a < n; ++a) grads[k * n + a] = d[a];
  }
  auto ratio = [&](std::size_t i, std::size_t j, double dist) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      const double d = grads[i * n + a] - grads[j * n + a];
      s += d * d;
    }
    return std::sqrt(s) / std::pow(dist, alpha);
  };

  double best = 0.0;
  std::size_t pairs = 0;
  const double diameter = 2.0 * subdomain.radius;

  // Axis pairs at dyadic separations.
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Index idx = g.multi_index(nodes[k]);
    for (int a = 0; a < n; ++a) {
      for (int step = 1; step * h <= diameter; step *= 2) {
        if (idx[a] + step >= g.extent(a)) break;
        const std::size_t other = nodes[k] + static_cast<std::size_t>(step * g.stride(a));
        const int s = slot[other];
        if (s < 0) continue;
        best = std::max(best, ratio(k, static_cast<std::size_t>(s), step * h));
        ++pairs;
      }
    }
  }

  // Random pairs per distance decade.
  constexpr int kPerDecade = 1000;
  std::mt19937_64 rng(seed);
  for (double lo = 1.0; lo * h <= diameter; lo *= 10.0) {
    const double hi = 10.0 * lo;
    const long span = static_cast<long>(std::ceil(std::min(hi, diameter / h)));
    int accepted = 0;
    for (int attempt = 0; attempt < 50 * kPerDecade && accepted < kPerDecade; ++attempt) {
      const std::size_t k = static_cast<std::size_t>(rng() % nodes.size());
      Index idx = g.multi_index(nodes[k]);
      double d2 = 0.0;
      bool inside = true;
      for (int a = 0; a < n; ++a) {
        const long off = static_cast<long>(rng() % static_cast<std::uint64_t>(2 * span + 1)) - span;
        idx[a] += static_cast<int>(off);
        d2 += static_cast<double>(off * off);
        if (idx[a] < 0 || idx[a] >= g.extent(a)) inside = false;
      }
      const double dist = std::sqrt(d2);
      if (!inside || dist < lo || dist >= hi) continue;
      const int s = slot[g.flat_index(idx)];
      if (s < 0) continue;
      best = std::max(best, ratio(k, static_cast<std::size_t>(s), dist * h));
      ++accepted;
      ++pairs;
    }
  }
  if (pairs < 100) throw NumericalError("holder_gradient_seminorm: insufficient pairs");
  return best;
}

const char* to_string(Positivity p) {
  switch (p) {
    case Positivity::IdenticallyZero:
      return "identically-zero";
    case Positivity::StrictlyPositive:
      return "strictly-positive";
    case Positivity::Mixed:
      return "mixed";
  }
  return "?";
}

PositivityReport positivity_report(const ScalarField& u, double tol) {
  const Grid& g = u.grid();
  PositivityReport rep;
  rep.tol = tol;
  rep.sup_abs = u.sup_norm();
  rep.min_interior = std::numeric_limits<double>::infinity();
  for (std::size_t node : g.interior_nodes()) rep.min_interior = std::min(rep.min_interior, u[node]);
  if (rep.sup_abs <= tol) {
    rep.classification = Positivity::IdenticallyZero;
    return rep;
  }
  if (rep.min_interior > tol) {
    rep.classification = Positivity::StrictlyPositive;
    return rep;
  }
  rep.classification = Positivity::Mixed;
  for (std::size_t node : g.interior_nodes())
    if (u[node] <= tol) rep.dead_core.push_back(node);

  const int n = g.dim();
  const int corners = 1 << n;
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    if (g.node_class(node) == NodeClass::Exterior) continue;
    const Index base = g.multi_index(node);
    bool ok = true;
    for (int a = 0; a < n && ok; ++a) ok = base[a] + 1 < g.extent(a);
    if (!ok) continue;
    bool low = false, high = false;
    for (int c = 0; c < corners && ok; ++c) {
      Index idx = base;
      for (int a = 0; a < n; ++a) idx[a] += (c >> a) & 1;
      const std::size_t m = g.flat_index(idx);
      if (g.node_class(m) == NodeClass::Exterior) {
        ok = false;
        break;
      }
      (u[m] <= tol ? low : high) = true;
    }
    if (ok && low && high) rep.free_boundary.push_back(node);
  }
  return rep;
}

nlohmann::json to_json(const PositivityReport& rep, const Grid& grid) {
  const double cell = std::pow(grid.spacing(), grid.dim());
  const double volume = cell * static_cast<double>(rep.dead_core.size());
  // radius of the ball with the dead core's volume
  const double n = grid.dim();
  const double unit_ball = std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
  nlohmann::json fb = nlohmann::json::array();
  for (std::size_t node : rep.free_boundary) fb.push_back(to_std(grid.position(node)));
  return {{"classification", to_string(rep.classification)},
          {"tol", rep.tol},
          {"min_interior", rep.min_interior},
          {"sup_abs", rep.sup_abs},
          {"dead_core_count", rep.dead_core.size()},
          {"dead_core_volume", volume},
          {"dead_core_equivalent_radius", std::pow(volume / unit_ball, 1.0 / n)},
          {"free_boundary_cell_count", rep.free_boundary.size()},
          {"free_boundary_cells", fb},
          {"dead_core_nodes", rep.dead_core}};
}

double hopf_slope(const ScalarField& u, const Vec& z, const Vec& x0, double r, int samples,
                  std::optional<double> segment_length) {
  const double L = segment_length.value_or(r);
  const double dist = (x0 - z).norm();
  if (!(r > 0.0) || !(dist > 0.0) || !(L > 0.0) || samples < 8)
    throw InvalidArgument("hopf_slope: degenerate segment");
  const Vec e = (x0 - z) / dist;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= samples; ++k) {
    const Vec x = z + (L * k / samples) * e;
    const double gap = r - (x - x0).norm();
    if (!(gap > 0.0)) continue;
    best = std::min(best, interpolate(u, x) / gap);
  }
  if (!std::isfinite(best)) throw InvalidArgument("hopf_slope: degenerate segment");
  return best;
}

Vec free_boundary_point(const ScalarField& u, const Vec& origin, const Vec& direction, double tol) {
  const double len = direction.norm();
  if (!(len > 0.0)) throw InvalidArgument("free_boundary_point: zero direction");
  const Vec e = direction / len;
  const double h = u.grid().spacing();
  const double step = 0.125 * h;
  bool seen_low = false;
  double t_low = 0.0;
  for (double t = 0.0;; t += step) {
    const auto v = try_interpolate(u, origin + t * e);
    if (!v) break;
    if (*v <= tol) {
      seen_low = true;
      t_low = t;
    } else if (seen_low) {
      double a = t_low, b = t;
      while (b - a > 1e-12 * h) {
        const double mid = 0.5 * (a + b);
        if (interpolate(u, origin + mid * e) <= tol) a = mid;
        else b = mid;
      }
      return origin + b * e;
    }
  }
  throw NumericalError("free_boundary_point: no crossing of the level tol along the ray");
}

Vec locate_extremum(const ScalarField& u, Extremum kind) {
  const Grid& g = u.grid();
  const auto& nodes = g.interior_nodes();
  if (nodes.empty()) throw InvalidArgument("locate_extremum: grid has no interior nodes");
  std::size_t best = nodes.front();
  for (std::size_t node : nodes) {
    if (kind == Extremum::Min ? u[node] < u[best] : u[node] > u[best]) best = node;
  }
  Vec x = g.position(best);
  const double h = g.spacing();
  for (int a = 0; a < g.dim(); ++a) {
    const std::size_t s = static_cast<std::size_t>(g.stride(a));
    const double um = u[best - s], u0 = u[best], up = u[best + s];
    const double denom = um - 2.0 * u0 + up;
    if (denom == 0.0) continue;
    x[a] += std::clamp(0.5 * h * (um - up) / denom, -0.5 * h, 0.5 * h);
  }
  return x;
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [r, v] : fit.samples) samples.push_back({r, v});
  nlohmann::json j = {{"kind", fit.kind},
                      {"x0", to_std(fit.x0)},
                      {"center_value", fit.center_value},
                      {"exponent", fit.exponent},
                      {"intercept", fit.log_intercept},
                      {"r2", fit.r_squared},
                      {"radii", fit.radii},
                      {"dropped", fit.dropped},
                      {"samples", samples}};
  if (fit.target) j["target"] = *fit.target;
  if (fit.constant) j["constant"] = *fit.constant;
  return j;
}

std::string to_csv(const FitResult& fit) {
  std::string out = "r,value\n";
  char buf[80];
  for (const auto& [r, v] : fit.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r, v);
    out += buf;
  }
  return out;
}

}  // namespace nplap
