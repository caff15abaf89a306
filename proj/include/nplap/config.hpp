#pragma once

#include "nplap/expression.hpp"
#include "nplap/solver.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nplap {

/// Malformed or unknown configuration input. `line` is 1-based (0 when not tied to a line).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        key_(std::move(key)) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// How one coefficient is supplied.
struct CoefficientSource {
  enum class Kind { Default, Profile, Expressions };
  Kind kind = Kind::Default;
  std::vector<Expression> components;  // one entry, or dim entries for the drift
  int line = 0;
};

struct ProfileSettings {
  std::string name;  // henon, nonuniqueness, power, barrier-nondeg, barrier-hopf
  std::optional<double> r;
  std::vector<double> center;
  std::string weight = "printed";   // henon: printed | exact
  std::string variant = "v";        // nonuniqueness: v | zero
  int axis = 1;                     // power: 1-based
  double alpha = 1.0;               // power exponent alpha
  std::optional<double> kappa;      // barrier-nondeg; half the admissible bound when empty
  double c0 = 1.0;
  std::string regime = "sublinear";
  double alpha_h = 20.0;            // barrier-hopf
  int line = 0;
};

struct AnalysisSettings {
  std::string field = "solve";        // solve | artifact | profile
  std::string artifact;               // solution stem path for field = artifact
  std::string measure = "growth";     // growth | nondegeneracy | holder
  std::string x0 = "min";             // min | max | free-boundary | explicit coordinates
  std::vector<double> radii;
  std::optional<double> target;
  double alpha = 0.5;                 // holder exponent
  std::optional<double> subdomain_radius;
  double deadcore_tol = 1e-8;
  std::optional<double> higher_continuity_alpha;  // weight exponent, recorded only
};

struct ExperimentConfig {
  std::filesystem::path source;
  ProblemParams params;
  CoefficientSource drift, rho, source_term, boundary;
  std::optional<ProfileSettings> profile;
  int dim = 2;
  double h = 1.0 / 64.0;
  double radius = 1.0;
  std::vector<double> center;
  std::string boundary_sampling = "projection";  // projection | nodal
  SolverConfig solver;
  std::string method = "plain";  // plain | perron
  std::optional<Expression> bracket_lower;
  std::optional<Expression> bracket_upper;  // default: the constant sup |g| on the boundary
  AnalysisSettings analysis;
  std::string output_dir = "out";
  std::vector<std::string> formats{"json", "csv"};
};

/// Flat sectioned `key = value` text with '#' comments.
ExperimentConfig parse_experiment(const std::string& text, const std::filesystem::path& origin = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);

}  // namespace nplap
