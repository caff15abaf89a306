#include "nplap/analysis.hpp"
#include "nplap/profiles.hpp"

#include "doctest.h"

#include <cmath>

using namespace nplap;

namespace {

GridPtr disk(double h) { return build_grid(2, h, Vec::Zero(2), 1.0); }

ScalarField radial_power(const GridPtr& g, double gamma, double k = 1.0) {
  return sample([=](const Vec& x) { return k * std::pow(x.norm(), gamma); }, g);
}

}  // namespace

TEST_CASE("dyadic radii") {
  const auto r = dyadic_radii(2, 5);
  REQUIRE(r.size() == 4);
  CHECK(r.front() == 0.25);
  CHECK(r.back() == 0.03125);
  CHECK(dyadic_radii(1, 1, 3.0).front() == 1.5);
  CHECK_THROWS_AS(dyadic_radii(3, 2), InvalidArgument);
}

TEST_CASE("growth exponent calibration on exact powers") {
  auto g = disk(1.0 / 256);
  const auto radii = dyadic_radii(2, 5);
  for (double gamma : {1.2, 1.5, 2.0, 2.5}) {
    const FitResult fit = growth_exponent(radial_power(g, gamma), Vec::Zero(2), radii);
    INFO("gamma = " << gamma);
    CHECK(std::abs(fit.exponent - gamma) <= 0.02);
    CHECK(fit.r_squared >= 0.999);
    CHECK(fit.samples.size() == 4);
    for (std::size_t i = 0; i + 1 < fit.radii.size(); ++i) CHECK(fit.radii[i] > fit.radii[i + 1]);
  }
  // Off-lattice center: u(x0) comes from interpolation.
  const Vec x0 = make_vec({0.1 + 1.0 / 512, -0.05});
  auto shifted = sample([&](const Vec& x) { return (x - x0).squaredNorm(); }, g);
  CHECK(std::abs(growth_exponent(shifted, x0, radii).exponent - 2.0) <= 0.02);
}

TEST_CASE("growth exponent needs decay data") {
  auto g = disk(1.0 / 64);
  const ScalarField flat(g, 2.0);
  CHECK_THROWS_WITH_AS(growth_exponent(flat, Vec::Zero(2), dyadic_radii(2, 5)),
                       doctest::Contains("insufficient decay data"), NumericalError);
  CHECK_THROWS_AS(growth_exponent(radial_power(g, 2), Vec::Zero(2), dyadic_radii(2, 4)),
                  NumericalError);
}

TEST_CASE("non-degeneracy curve") {
  auto g = disk(1.0 / 256);
  const auto fit = nondegeneracy_curve(radial_power(g, 1.5, 0.1), Vec::Zero(2), dyadic_radii(2, 5), 1.5);
  CHECK(std::abs(fit.exponent - 1.5) <= 0.02);
  REQUIRE(fit.constant.has_value());
  CHECK(*fit.constant == doctest::Approx(0.1).epsilon(0.02));
  const ScalarField zero(g, 0.0);
  CHECK_THROWS_WITH(nondegeneracy_curve(zero, Vec::Zero(2), dyadic_radii(2, 5), 1.5),
                    doctest::Contains("all shell values nonpositive"));
}

TEST_CASE("fit serialization") {
  auto g = disk(1.0 / 128);
  const auto fit = growth_exponent(radial_power(g, 2.0), Vec::Zero(2), dyadic_radii(2, 5));
  const auto j = to_json(fit);
  for (const char* key : {"exponent", "intercept", "r2", "samples", "radii"}) CHECK(j.contains(key));
  CHECK(j["samples"].size() == 4);
  const std::string csv = to_csv(fit);
  CHECK(csv.rfind("r,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("Holder gradient seminorm") {
  const Ball half{Vec::Zero(2), 0.5};
  auto g = disk(1.0 / 64);
  CHECK(holder_gradient_seminorm(sample([](const Vec& x) { return 3 * x[0] - x[1]; }, g), 0.5, half) ==
        doctest::Approx(0.0).epsilon(1e-12));
  const double lip =
      holder_gradient_seminorm(sample([](const Vec& x) { return 0.5 * x.squaredNorm(); }, g), 1.0, half);
  CHECK(std::abs(lip - 1.0) <= 1e-6);
  CHECK_THROWS_AS(holder_gradient_seminorm(ScalarField(disk(0.25), 0.0), 0.5, Ball{Vec::Zero(2), 0.3}),
                  NumericalError);
}

TEST_CASE("Holder seminorm: stable at the true exponent, growing above it") {
  const Ball half{Vec::Zero(2), 0.5};
  auto at = [&](double h, double alpha) {
    return holder_gradient_seminorm(radial_power(disk(h), 1.5), alpha, half, 7);
  };
  const double a = at(1.0 / 64, 0.5), b = at(1.0 / 128, 0.5);
  CHECK(std::abs(b - a) / a < 0.10);
  // 2^{(alpha - 1/2) k}: a factor 2 needs four halvings at alpha = 3/4.
  const double c = at(1.0 / 32, 0.75), d = at(1.0 / 512, 0.75);
  CHECK(d >= 2.0 * c);
  CHECK(at(1.0 / 32, 0.5) == at(1.0 / 32, 0.5));
}

TEST_CASE("positivity report") {
  auto g = disk(1.0 / 128);
  CHECK(positivity_report(ScalarField(g, 0.0), 1e-12).classification == Positivity::IdenticallyZero);
  CHECK(positivity_report(ScalarField(g, 1.0), 1e-12).classification == Positivity::StrictlyPositive);

  const auto hp = profile_henon(2, 1.0, 2.0, 0.5, 1.0, 0.25, 1.0, Vec::Zero(2));
  const ScalarField phi = sample(hp.profile.value, g);
  const auto rep = positivity_report(phi, 1e-12);
  REQUIRE(rep.classification == Positivity::Mixed);
  CHECK(!rep.free_boundary.empty());
  const auto exact = nodes_in_ball(*g, Vec::Zero(2), 0.25).size();
  const double ratio = static_cast<double>(rep.dead_core.size()) / static_cast<double>(exact);
  CHECK(std::abs(ratio - 1.0) <= 0.10);

  std::size_t prev = 0;
  for (double tol : {1e-14, 1e-8, 1e-5, 1e-3, 1e-2}) {
    const auto r = positivity_report(phi, tol);
    CHECK(r.dead_core.size() >= prev);
    prev = r.dead_core.size();
  }
  const auto j = to_json(rep, *g);
  CHECK(j["classification"] == "mixed");
}

TEST_CASE("Hopf slope") {
  auto g = disk(1.0 / 256);
  const Vec x0 = Vec::Zero(2);
  const double r = 0.5;
  const Vec z = make_vec({r, 0.0});
  auto cone = sample([&](const Vec& x) { return r - (x - x0).norm(); }, g);
  CHECK(hopf_slope(cone, z, x0, r) == doctest::Approx(1.0).epsilon(1e-9));
  auto cap = sample([&](const Vec& x) { return r * r - (x - x0).squaredNorm(); }, g);
  const double s = hopf_slope(cap, z, x0, r);
  CHECK(s >= r - 1e-3);
  CHECK(s <= 2 * r);

  const double a = 20.0;
  const auto barrier = sample(barrier_hopf(a, r).value, g);
  const double expected = 2 * a * r * std::exp(-a * r * r);
  CHECK(std::abs(hopf_slope(barrier, z, x0, r, 16, r / 8) - expected) <= 0.10 * expected);

  CHECK_THROWS_AS(hopf_slope(cone, x0, x0, r), InvalidArgument);
  CHECK_THROWS_AS(hopf_slope(cone, z, x0, r, 4), InvalidArgument);
}

TEST_CASE("extremum and free-boundary location") {
  auto g = disk(1.0 / 64);
  const Vec c = make_vec({0.113, -0.207});
  auto bowl = sample([&](const Vec& x) { return (x - c).squaredNorm(); }, g);
  CHECK((locate_extremum(bowl, Extremum::Min) - c).norm() < 1e-10);
  auto cap = sample([&](const Vec& x) { return 1 - (x - c).squaredNorm(); }, g);
  CHECK((locate_extremum(cap, Extremum::Max) - c).norm() < 1e-10);

  auto ramp = sample([](const Vec& x) { return x[0] - 0.2 + x[1] * x[1]; }, g);
  const Vec fb = free_boundary_point(ramp, Vec::Zero(2), make_vec({2.0, 0.0}), 1e-3);
  CHECK(std::abs(fb[0] - 0.201) < 1e-9);
  CHECK(fb[1] == 0.0);
  CHECK_THROWS_AS(free_boundary_point(ScalarField(g, 0.0), Vec::Zero(2), make_vec({1, 0}), 1e-3),
                  NumericalError);
}
