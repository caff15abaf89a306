#include "nplap/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nplap {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"problem", {"p", "theta", "sigma", "m", "henon_mode", "regime_override", "upwind_drift"}},
      {"coefficients", {"drift", "rho", "source", "boundary"}},
      {"profile",
       {"name", "r", "center", "weight", "variant", "axis", "alpha", "kappa", "c0", "regime",
        "alpha_h"}},
      {"grid", {"dim", "h", "radius", "center", "boundary_sampling"}},
      {"solver",
       {"tol", "max_iters", "dt_safety", "envelope", "eps_grad", "damping", "grad_floor",
        "log_every", "method", "bracket_lower", "bracket_upper"}},
      {"analysis",
       {"field", "artifact", "measure", "x0", "radii", "target", "alpha", "subdomain_radius",
        "deadcore_tol", "weight_alpha"}},
      {"output", {"directory", "formats"}},
  };
  return s;
}

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a = {
      {"B", "drift"}, {"f", "source"}, {"frak_f", "source"}, {"g", "boundary"}};
  return a;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::map<std::string, Section> tokenize(const std::string& text) {
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header \"" + s + "\"", line);
      section = trim(s.substr(1, s.size() - 2));
      if (!schema().count(section))
        throw ConfigError("unknown section [" + section + "]", line, section);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got \"" + s + "\"", line);
    std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError("key \"" + key + "\" outside any section", line, key);
    if (section == "coefficients" && aliases().count(key)) key = aliases().at(key);
    if (!schema().at(section).count(key))
      throw ConfigError("unknown key \"" + key + "\" in [" + section + "]", line, key);
    if (value.empty()) throw ConfigError("empty value for key \"" + key + "\"", line, key);
    if (out[section].count(key))
      throw ConfigError("duplicate key \"" + key + "\" in [" + section + "]", line, key);
    out[section][key] = {value, line};
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Section> s) : sections_(std::move(s)) {}

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) return nullptr;
    const auto kt = it->second.find(key);
    return kt == it->second.end() ? nullptr : &kt->second;
  }

  double number(const Entry& e, const std::string& key) const {
    try {
      const Expression x = Expression::parse(e.value, kMaxDim);
      if (!x.is_constant()) throw ConfigError("value of \"" + key + "\" must be a number", e.line, key);
      const double v = x(Vec::Zero(kMaxDim));
      if (!std::isfinite(v)) throw ConfigError("value of \"" + key + "\" is not finite", e.line, key);
      return v;
    } catch (const ParseError& err) {
      throw ConfigError("bad number for \"" + key + "\": " + err.what(), e.line, key);
    }
  }

  void get(const std::string& sec, const std::string& key, double& out) const {
    if (const Entry* e = find(sec, key)) out = number(*e, key);
  }
  void get(const std::string& sec, const std::string& key, std::optional<double>& out) const {
    if (const Entry* e = find(sec, key)) out = number(*e, key);
  }
  void get(const std::string& sec, const std::string& key, int& out) const {
    if (const Entry* e = find(sec, key)) {
      const double v = number(*e, key);
      if (v != std::floor(v) || std::abs(v) > 2e9)
        throw ConfigError("value of \"" + key + "\" must be an integer", e->line, key);
      out = static_cast<int>(v);
    }
  }
  void get(const std::string& sec, const std::string& key, bool& out) const {
    if (const Entry* e = find(sec, key)) {
      std::string v = e->value;
      std::transform(v.begin(), v.end(), v.begin(), ::tolower);
      if (v == "true" || v == "yes" || v == "1") out = true;
      else if (v == "false" || v == "no" || v == "0") out = false;
      else throw ConfigError("value of \"" + key + "\" must be true or false", e->line, key);
    }
  }
  void get(const std::string& sec, const std::string& key, std::string& out) const {
    if (const Entry* e = find(sec, key)) out = e->value;
  }
  void get_list(const std::string& sec, const std::string& key, std::vector<double>& out) const {
    if (const Entry* e = find(sec, key)) {
      out.clear();
      for (const std::string& part : split(e->value, ',')) out.push_back(number({part, e->line}, key));
    }
  }
  void choice(const std::string& sec, const std::string& key, std::string& out,
              std::initializer_list<const char*> allowed) const {
    const Entry* e = find(sec, key);
    if (!e) return;
    for (const char* a : allowed)
      if (e->value == a) {
        out = e->value;
        return;
      }
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw ConfigError("value of \"" + key + "\" must be one of: " + list, e->line, key);
  }

 private:
  std::map<std::string, Section> sections_;
};

CoefficientSource coefficient(const Reader& rd, const std::string& key, int dim, bool vector) {
  CoefficientSource c;
  const Entry* e = rd.find("coefficients", key);
  if (!e) return c;
  c.line = e->line;
  if (e->value == "profile") {
    c.kind = CoefficientSource::Kind::Profile;
    return c;
  }
  c.kind = CoefficientSource::Kind::Expressions;
  for (const std::string& part : split(e->value, ',')) {
    try {
      c.components.push_back(Expression::parse(part, dim));
    } catch (const ParseError& err) {
      throw ConfigError(std::string("coefficient \"") + key + "\": " + err.what(), e->line, key);
    }
  }
  const int n = static_cast<int>(c.components.size());
  if (vector ? (n != 1 && n != dim) : n != 1)
    throw ConfigError("coefficient \"" + key + "\" expects " +
                          (vector ? "1 or " + std::to_string(dim) : std::string("1")) +
                          " component(s), got " + std::to_string(n),
                      e->line, key);
  return c;
}

}  // namespace

ExperimentConfig parse_experiment(const std::string& text, const std::filesystem::path& origin) {
  const Reader rd(tokenize(text));
  ExperimentConfig cfg;
  cfg.source = origin;

  ProblemParams& p = cfg.params;
  rd.get("problem", "p", p.p);
  rd.get("problem", "theta", p.theta);
  rd.get("problem", "sigma", p.sigma);
  rd.get("problem", "m", p.m);
  rd.get("problem", "henon_mode", p.henon_mode);
  rd.get("problem", "regime_override", p.regime_override);
  rd.get("problem", "upwind_drift", p.upwind_drift);

  rd.get("grid", "dim", cfg.dim);
  if (cfg.dim < 1 || cfg.dim > kMaxDim)
    throw ConfigError("grid dim must lie in [1, " + std::to_string(kMaxDim) + "]",
                      rd.find("grid", "dim") ? rd.find("grid", "dim")->line : 0, "dim");
  rd.get("grid", "h", cfg.h);
  rd.get("grid", "radius", cfg.radius);
  rd.choice("grid", "boundary_sampling", cfg.boundary_sampling, {"projection", "nodal"});
  cfg.center.assign(static_cast<std::size_t>(cfg.dim), 0.0);
  rd.get_list("grid", "center", cfg.center);
  if (static_cast<int>(cfg.center.size()) != cfg.dim)
    throw ConfigError("grid center must have dim components", rd.find("grid", "center")->line,
                      "center");

  cfg.drift = coefficient(rd, "drift", cfg.dim, true);
  cfg.rho = coefficient(rd, "rho", cfg.dim, false);
  cfg.source_term = coefficient(rd, "source", cfg.dim, false);
  cfg.boundary = coefficient(rd, "boundary", cfg.dim, false);

  if (const Entry* e = rd.find("profile", "name")) {
    ProfileSettings ps;
    ps.line = e->line;
    rd.choice("profile", "name", ps.name,
              {"henon", "nonuniqueness", "power", "barrier-nondeg", "barrier-hopf"});
    rd.get("profile", "r", ps.r);
    ps.center.assign(static_cast<std::size_t>(cfg.dim), 0.0);
    rd.get_list("profile", "center", ps.center);
    if (static_cast<int>(ps.center.size()) != cfg.dim)
      throw ConfigError("profile center must have dim components",
                        rd.find("profile", "center")->line, "center");
    rd.choice("profile", "weight", ps.weight, {"printed", "exact"});
    rd.choice("profile", "variant", ps.variant, {"v", "zero"});
    rd.get("profile", "axis", ps.axis);
    if (ps.axis < 1 || ps.axis > cfg.dim)
      throw ConfigError("profile axis out of range", rd.find("profile", "axis")->line, "axis");
    rd.get("profile", "alpha", ps.alpha);
    rd.get("profile", "kappa", ps.kappa);
    rd.get("profile", "c0", ps.c0);
    rd.choice("profile", "regime", ps.regime, {"sublinear", "superlinear"});
    rd.get("profile", "alpha_h", ps.alpha_h);
    cfg.profile = ps;
  } else {
    for (const char* k : {"r", "center", "weight", "variant", "axis", "alpha", "kappa", "c0",
                          "regime", "alpha_h"})
      if (const Entry* e2 = rd.find("profile", k))
        throw ConfigError("profile settings require profile name", e2->line, k);
  }
  for (const CoefficientSource* c : {&cfg.drift, &cfg.rho, &cfg.source_term, &cfg.boundary})
    if (c->kind == CoefficientSource::Kind::Profile && !cfg.profile)
      throw ConfigError("coefficient set to \"profile\" but no [profile] name given", c->line);

  SolverConfig& s = cfg.solver;
  rd.get("solver", "tol", s.tol);
  rd.get("solver", "max_iters", s.max_iters);
  rd.get("solver", "dt_safety", s.dt_safety);
  std::string envelope = "regularized";
  rd.choice("solver", "envelope", envelope, {"regularized", "sub", "super"});
  if (envelope == "sub") s.envelope = EnvelopeMode::sub_envelope();
  if (envelope == "super") s.envelope = EnvelopeMode::super_envelope();
  rd.get("solver", "eps_grad", s.eps_grad);
  rd.get("solver", "damping", s.damping);
  rd.get("solver", "grad_floor", s.grad_floor);
  rd.get("solver", "log_every", s.log_every);
  rd.choice("solver", "method", cfg.method, {"plain", "perron"});
  for (const char* k : {"bracket_lower", "bracket_upper"}) {
    const Entry* e = rd.find("solver", k);
    if (!e) continue;
    try {
      (std::string(k) == "bracket_lower" ? cfg.bracket_lower : cfg.bracket_upper) =
          Expression::parse(e->value, cfg.dim);
    } catch (const ParseError& err) {
      throw ConfigError(std::string(k) + ": " + err.what(), e->line, k);
    }
  }
  try {
    s.validate();
  } catch (const InvalidArgument& err) {
    throw ConfigError(err.what());
  }

  AnalysisSettings& a = cfg.analysis;
  rd.choice("analysis", "field", a.field, {"solve", "artifact", "profile"});
  rd.get("analysis", "artifact", a.artifact);
  rd.choice("analysis", "measure", a.measure, {"growth", "nondegeneracy", "holder"});
  if (const Entry* e = rd.find("analysis", "x0")) {
    if (e->value == "min" || e->value == "max" || e->value == "free-boundary") {
      a.x0 = e->value;
    } else {
      std::vector<double> x;
      rd.get_list("analysis", "x0", x);
      if (static_cast<int>(x.size()) != cfg.dim)
        throw ConfigError("analysis x0 must be min, max, free-boundary or dim coordinates", e->line, "x0");
      a.x0 = e->value;
    }
  }
  if (const Entry* e = rd.find("analysis", "radii")) {
    const auto words = split(e->value, ' ');
    if (!words.empty() && words.front() == "dyadic") {
      std::vector<std::string> parts;
      for (const auto& w : words)
        if (!w.empty()) parts.push_back(w);
      if (parts.size() != 3)
        throw ConfigError("radii = dyadic FIRST LAST expects two integers", e->line, "radii");
      const double first = rd.number({parts[1], e->line}, "radii");
      const double last = rd.number({parts[2], e->line}, "radii");
      if (first != std::floor(first) || last != std::floor(last) || first > last)
        throw ConfigError("radii = dyadic FIRST LAST expects increasing integers", e->line,
                          "radii");
      for (int k = static_cast<int>(first); k <= static_cast<int>(last); ++k)
        a.radii.push_back(std::ldexp(1.0, -k));
    } else {
      rd.get_list("analysis", "radii", a.radii);
    }
    for (double r : a.radii)
      if (!(r > 0.0)) throw ConfigError("radii must be positive", e->line, "radii");
  }
  rd.get("analysis", "target", a.target);
  rd.get("analysis", "alpha", a.alpha);
  rd.get("analysis", "subdomain_radius", a.subdomain_radius);
  rd.get("analysis", "deadcore_tol", a.deadcore_tol);
  rd.get("analysis", "weight_alpha", a.higher_continuity_alpha);
  if (a.field == "artifact" && a.artifact.empty())
    throw ConfigError("analysis field = artifact requires an artifact path",
                      rd.find("analysis", "field")->line, "artifact");

  rd.get("output", "directory", cfg.output_dir);
  if (const Entry* e = rd.find("output", "formats")) {
    cfg.formats.clear();
    for (const std::string& f : split(e->value, ',')) {
      if (f != "json" && f != "csv")
        throw ConfigError("unknown output format \"" + f + "\"", e->line, "formats");
      cfg.formats.push_back(f);
    }
  }

  try {
    validate(cfg.params);
  } catch (const InvalidArgument& err) {
    throw ConfigError(err.what());
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment(ss.str(), path);
}

}  // namespace nplap
