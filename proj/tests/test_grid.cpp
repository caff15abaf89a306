#include "nplap/grid.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace nplap;

namespace {

GridPtr disk(double h, double R = 1.0) { return build_grid(2, h, Vec::Zero(2), R); }

std::size_t node_at(const Grid& g, const Vec& x) {
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if ((g.position(i) - x).norm() < 1e-12) return i;
  FAIL("no node at requested point");
  return 0;
}

}  // namespace

TEST_CASE("1-D grid keeps interior stencils strictly inside") {
  auto g = build_grid(1, 0.25, Vec::Zero(1), 1.0);
  REQUIRE(!g->interior_nodes().empty());
  for (auto i : g->interior_nodes()) {
    const double x = g->position(i)[0];
    CHECK(x - 0.25 >= -1.0 - 1e-12);
    CHECK(x + 0.25 <= 1.0 + 1e-12);
    CHECK(std::abs(x) < 1.0);
  }
}

TEST_CASE("2-D coarse classification") {
  auto g = disk(0.5);
  CHECK(g->node_class(node_at(*g, make_vec({0, 0}))) == NodeClass::Interior);
  CHECK(g->node_class(node_at(*g, make_vec({1, 0}))) == NodeClass::Boundary);
}

TEST_CASE("interior count approximates the disk area") {
  auto g = disk(1.0 / 64);
  // Independent enumeration of lattice points whose 3x3 block lies in the closed disk.
  const double h = 1.0 / 64;
  std::size_t expected = 0;
  for (int i = -70; i <= 70; ++i)
    for (int j = -70; j <= 70; ++j) {
      bool ok = true;
      for (int a = -1; a <= 1 && ok; ++a)
        for (int b = -1; b <= 1 && ok; ++b)
          ok = std::hypot((i + a) * h, (j + b) * h) <= 1.0 + 1e-12;
      expected += ok;
    }
  CHECK(g->interior_nodes().size() == expected);
  const double area = static_cast<double>(expected) * h * h;
  CHECK(std::abs(area - std::numbers::pi) / std::numbers::pi < 0.05);
}

TEST_CASE("build_grid rejects bad input") {
  CHECK_THROWS_AS(build_grid(0, 0.1, Vec::Zero(0), 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_grid(2, 0.75, Vec::Zero(2), 1.0), InvalidArgument);
  CHECK_THROWS_AS(build_grid(2, -0.1, Vec::Zero(2), 1.0), InvalidArgument);
}

TEST_CASE("classification is deterministic and stencil-safe") {
  for (int dim : {2, 3}) {
    const double h = dim == 2 ? 1.0 / 16 : 1.0 / 8;
    auto a = build_grid(dim, h, Vec::Constant(dim, 0.3), 1.5);
    auto b = build_grid(dim, h, Vec::Constant(dim, 0.3), 1.5);
    CHECK(*a == *b);
    for (std::size_t i = 0; i < a->node_count(); ++i) CHECK(a->node_class(i) == b->node_class(i));
    for (auto i : a->interior_nodes())
      for (auto off : a->neighbourhood_offsets())
        REQUIRE(a->node_class(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + off)) !=
                NodeClass::Exterior);
    const double band = h * std::sqrt(dim);
    for (auto i : a->boundary_nodes())
      CHECK(std::abs((a->position(i) - a->domain().center).norm() - 1.5) <= band + 1e-12);
  }
}

TEST_CASE("sample evaluates nodally and rejects non-finite values") {
  auto g = disk(0.125);
  auto one = sample([](const Vec&) { return 1.0; }, g);
  for (std::size_t i = 0; i < g->node_count(); ++i)
    if (g->node_class(i) != NodeClass::Exterior) CHECK(one[i] == 1.0);

  auto g1 = build_grid(1, 0.125, Vec::Zero(1), 1.0);
  auto x1 = sample([](const Vec& x) { return x[0]; }, g1);
  for (std::size_t i = 0; i < g1->node_count(); ++i)
    if (g1->node_class(i) != NodeClass::Exterior) CHECK(x1[i] == g1->position(i)[0]);

  auto pw = sample([](const Vec& x) { return std::pow(x.norm(), 1.5); }, g);
  CHECK(pw[node_at(*g, make_vec({0.5, 0}))] == doctest::Approx(0.353553).epsilon(1e-6));

  CHECK_THROWS_AS(sample([](const Vec& x) { return 1.0 / x.norm(); }, g), NumericalError);
}

TEST_CASE("sup over balls and spheres") {
  const double h = 1.0 / 128;
  auto g = disk(h);
  const Vec o = Vec::Zero(2);
  auto three = sample([](const Vec&) { return 3.0; }, g);
  CHECK(sup_over_ball(three, make_vec({0.2, -0.1}), 0.3) == 3.0);

  auto r = sample([](const Vec& x) { return x.norm(); }, g);
  CHECK(std::abs(sup_over_ball(r, o, 0.5) - 0.5) <= h);
  CHECK(std::abs(sup_over_sphere(r, o, 0.5) - 0.5) <= h * std::sqrt(2.0) + 1e-12);

  auto bump = sample([](const Vec& x) { return 1.0 - x.squaredNorm(); }, g);
  CHECK(sup_over_ball(bump, o, 0.25) == 1.0);

  auto zero = sample([](const Vec&) { return 0.0; }, g);
  CHECK(sup_over_sphere(zero, o, 0.5) == 0.0);

  auto psi = sample([](const Vec& x) { return 0.1 * std::pow(x.norm(), 1.5); }, g);
  const double s = sup_over_sphere(psi, o, 0.25);
  // Oracle: the radial profile's value on the outer edge of the shell.
  const double outer = 0.1 * std::pow(0.25 + h * std::sqrt(2.0), 1.5);
  CHECK(s >= 0.0125 - 1e-12);
  CHECK(s <= outer + 1e-12);

  CHECK_THROWS(sup_over_ball(three, make_vec({5, 5}), 0.1));
  CHECK_THROWS(sup_over_sphere(three, o, 3.0));
}

TEST_CASE("sup over ball is monotone in the radius") {
  auto g = disk(1.0 / 32);
  auto u = sample([](const Vec& x) { return std::sin(3 * x[0]) * std::cos(2 * x[1]); }, g);
  const Vec x0 = make_vec({0.1, 0.2});
  double prev = -1e300;
  for (double r = 0.05; r < 0.7; r += 0.05) {
    const double s = sup_over_ball(u, x0, r);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("multilinear interpolation is exact on bilinear data") {
  auto g = disk(1.0 / 16);
  auto u = sample([](const Vec& x) { return 1 + 2 * x[0] - x[1] + 0.5 * x[0] * x[1]; }, g);
  const Vec x = make_vec({0.123, -0.271});
  CHECK(interpolate(u, x) == doctest::Approx(1 + 2 * 0.123 + 0.271 - 0.5 * 0.123 * 0.271));
  CHECK(!try_interpolate(u, make_vec({0.999, 0.999})).has_value());
  CHECK_THROWS(interpolate(u, make_vec({0.999, 0.999})));
}
