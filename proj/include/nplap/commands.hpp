#pragma once

#include "nplap/config.hpp"
#include "nplap/profiles.hpp"
#include "nplap/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nplap {

/// Exit statuses shared by every verb.
enum ExitCode : int { kExitOk = 0, kExitNumerical = 1, kExitConfig = 2 };

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides [output] directory
  int threads = 0;
  std::uint64_t seed = 0;
  std::ostream* out_stream = nullptr;  // console summary; std::cout when null
};

/// Grid, sampled problem and the registry profile a config refers to.
struct Experiment {
  ExperimentConfig config;
  GridPtr grid;
  ProblemSpec spec;
  std::optional<AnalyticProfile> profile;
};

Experiment build_experiment(const ExperimentConfig& cfg);
AnalyticProfile build_profile(const ProfileSettings& ps, const ExperimentConfig& cfg);

/// Plain solve or Perron bracket per the config.
SolveResult run_solver(const Experiment& ex, int threads);

/// Expected exponent for growth fits: 1 + 1/(1+theta), or (2+theta+alpha)/(1+theta-m) in Henon mode.
double default_target(const ExperimentConfig& cfg);

int cmd_solve(const CommandOptions& opt);
int cmd_verify_profiles(const std::string& selector, double h_coarse, const CommandOptions& opt);
int cmd_exponent(const CommandOptions& opt);
int cmd_reference_exponents(const std::vector<double>& p, const std::vector<double>& theta,
                            const CommandOptions& opt);
int cmd_residual_check(const CommandOptions& opt);

/// Runs `body`, mapping configuration/IO errors to 2 and numerical failures to 1.
int run_guarded(const std::function<int()>& body, std::ostream& err);

/// Profiles checked by verify-profiles for a selector ("all" or a profile name).
std::vector<AnalyticProfile> profiles_for_selector(const std::string& selector);

}  // namespace nplap
