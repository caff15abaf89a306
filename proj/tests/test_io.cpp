#include "nplap/config.hpp"
#include "nplap/expression.hpp"
#include "nplap/io.hpp"

#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

using namespace nplap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nplap_unit" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int error_line(const std::string& text) {
  try {
    parse_experiment(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("expression evaluation") {
  const Vec x = make_vec({0.5, -2.0});
  auto eval = [&](const char* s) { return Expression::parse(s, 2)(x); };
  CHECK(eval("1 + 2*3") == 7);
  CHECK(eval("2^3^2") == 512);
  CHECK(eval("-2^2") == -4);
  CHECK(eval("(1 - x1) / 4") == doctest::Approx(0.125));
  CHECK(eval("abs(x2) + |x|") == doctest::Approx(2.0 + std::hypot(0.5, 2.0)));
  CHECK(eval("1e-3 * x2") == doctest::Approx(-2e-3));
  CHECK(Expression::parse("1/128", 2).is_constant());
  CHECK(!Expression::parse("x1 + 1", 2).is_constant());
}

TEST_CASE("expression errors carry a column") {
  CHECK_THROWS_AS(Expression::parse("x3", 2), ParseError);
  CHECK_THROWS_AS(Expression::parse("1 +", 2), ParseError);
  CHECK_THROWS_AS(Expression::parse("sin(x1)", 2), ParseError);
  try {
    Expression::parse("1 + * 2", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.column() == 5);
  }
}

TEST_CASE("config parsing") {
  const auto cfg = parse_experiment(R"(# comment
[problem]
p = 3
theta = 1
sigma = 1.5

[coefficients]
source = 1
boundary = x1^2 - x2   # trailing comment

[grid]
dim = 2
h = 1/128

[solver]
tol = 1e-6
damping = 0.05

[analysis]
radii = dyadic 2 5
x0 = 0.1, -0.2
)");
  CHECK(cfg.params.p == 3);
  CHECK(cfg.h == 1.0 / 128);
  CHECK(cfg.solver.tol == 1e-6);
  REQUIRE(cfg.solver.damping.has_value());
  CHECK(*cfg.solver.damping == 0.05);
  CHECK(cfg.analysis.radii == std::vector<double>{0.25, 0.125, 0.0625, 0.03125});
  REQUIRE(cfg.boundary.kind == CoefficientSource::Kind::Expressions);
  CHECK(cfg.boundary.components[0](make_vec({2, 1})) == 3);
}

TEST_CASE("config errors name the line and the key") {
  CHECK(error_line("[problem]\np = 2\nbogus = 1\n") == 3);
  try {
    parse_experiment("[grid]\nh = 0.1\nwidth = 3\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "width");
    CHECK(std::string(e.what()).find("width") != std::string::npos);
    CHECK(std::string(e.what()).rfind("line 3:", 0) == 0);
  }
  CHECK(error_line("[nowhere]\n") == 1);
  CHECK(error_line("[grid]\nh = 0.1\nh = 0.2\n") == 3);
  CHECK(error_line("p = 2\n") == 1);
  CHECK(error_line("[grid]\nh 0.1\n") == 2);
  CHECK(error_line("[grid]\nh = x1\n") == 2);
  CHECK(error_line("[solver]\nmax_iters = 2.5\n") == 2);
  CHECK(error_line("[problem]\nhenon_mode = maybe\n") == 2);
  CHECK(error_line("[analysis]\nradii = dyadic 5 2\n") == 2);
  CHECK(error_line("[coefficients]\nboundary = profile\n") > 0);
  CHECK_THROWS_AS(load_experiment("/nonexistent/config.cfg"), ConfigError);
}

TEST_CASE("solution artifacts round-trip bitwise") {
  const fs::path dir = scratch("roundtrip");
  auto g = build_grid(2, 1.0 / 16, make_vec({0.25, -0.5}), 1.5);
  ScalarField u = sample([](const Vec& x) { return std::sin(7 * x[0]) * std::exp(x[1]) / 3.0; }, g, "probe");
  u[g->interior_nodes().front()] = -0.0;
  u[g->interior_nodes().back()] = 5e-324;
  write_solution(u, dir / "solution");
  const ScalarField v = read_solution(dir / "solution");
  CHECK(v.grid() == u.grid());
  CHECK(v.tag() == "probe");
  REQUIRE(v.size() == u.size());
  CHECK(std::memcmp(v.values().data(), u.values().data(), u.size() * sizeof(double)) == 0);
  const auto meta = read_json(dir / "solution.json");
  CHECK(meta["schema_version"] == kSchemaVersion);
  CHECK(fs::file_size(dir / "solution.bin") == u.size() * 8);
}

TEST_CASE("damaged solution artifacts are rejected") {
  const fs::path dir = scratch("damaged");
  auto g = build_grid(2, 0.25, Vec::Zero(2), 1.0);
  write_solution(ScalarField(g, 1.0), dir / "s");
  fs::resize_file(dir / "s.bin", fs::file_size(dir / "s.bin") - 3);
  CHECK_THROWS_AS(read_solution(dir / "s"), IoError);

  write_solution(ScalarField(g, 1.0), dir / "t");
  std::ofstream(dir / "t.bin", std::ios::app | std::ios::binary) << "xx";
  CHECK_THROWS_AS(read_solution(dir / "t"), IoError);

  std::ofstream(dir / "u.json") << "{ not json";
  CHECK_THROWS_AS(read_solution(dir / "u"), IoError);
  CHECK_THROWS_AS(read_solution(dir / "missing"), IoError);
}

TEST_CASE("report JSON is deterministic and omits wall time") {
  SolveReport rep;
  rep.iterations = 3;
  rep.final_residual = 1e-9;
  rep.converged = true;
  rep.wall_seconds = 1.25;
  rep.history = {{0, 1.0, 0.1}, {3, 1e-9, 0.2}};
  const std::string a = dump_json(to_json(rep));
  rep.wall_seconds = 99.0;
  CHECK(dump_json(to_json(rep)) == a);
  CHECK(a.find("wall") == std::string::npos);
  CHECK(iteration_log(rep) == "0 1 0.10000000000000001\n3 1.0000000000000001e-09 0.20000000000000001\n");
}
