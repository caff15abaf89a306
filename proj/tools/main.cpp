#include "nplap/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  using namespace nplap;
  CLI::App app{"Finite-difference experiments for degenerate normalized p-Laplacian equations"};
  app.require_subcommand(1);

  CommandOptions opt;
  std::string config, out;
  app.add_option("--config", config, "Experiment config file");
  app.add_option("--out", out, "Output directory (overrides [output] directory)");
  app.add_option("--threads", opt.threads, "Worker threads (0 = OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", opt.seed, "Seed for Holder pair sampling");

  auto* solve = app.add_subcommand("solve", "Solve the Dirichlet problem of a config");
  auto* verify = app.add_subcommand("verify-profiles", "Check analytic profiles against the scheme");
  std::string selector = "all";
  double h_coarse = 1.0 / 64.0;
  verify->add_option("selector", selector,
                     "all, henon, nonuniqueness, power, barrier-nondeg or barrier-hopf");
  verify->add_option("--h-coarse", h_coarse, "Coarse spacing (fine spacing is h/2)")
      ->check(CLI::PositiveNumber);
  auto* exponent = app.add_subcommand("exponent", "Fit growth or non-degeneracy exponents");
  auto* refexp = app.add_subcommand("reference-exponents", "Tabulate closed-form exponents");
  std::vector<double> ps{2.0, 3.0, 4.0}, thetas{1.0};
  refexp->add_option("--p", ps, "p values")->delimiter(',');
  refexp->add_option("--theta", thetas, "theta values")->delimiter(',');
  auto* rescheck = app.add_subcommand("residual-check", "Residual of a stored solution");

  for (auto* sub : {solve, verify, exponent, refexp, rescheck}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  opt.config = config;
  if (!out.empty()) opt.out = out;

  auto need_config = [&]() {
    if (config.empty()) throw ConfigError("--config is required for this command");
  };
  return run_guarded(
      [&]() -> int {
        if (*solve) {
          need_config();
          return cmd_solve(opt);
        }
        if (*verify) return cmd_verify_profiles(selector, h_coarse, opt);
        if (*exponent) {
          need_config();
          return cmd_exponent(opt);
        }
        if (*refexp) return cmd_reference_exponents(ps, thetas, opt);
        need_config();
        return cmd_residual_check(opt);
      },
      std::cerr);
}
