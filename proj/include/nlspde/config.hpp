#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlspde/gate.hpp"
#include "nlspde/solver.hpp"

namespace nlspde {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { elliptic, parabolic, stochastic, superlinear, covariance };
enum class Theorem { semilinear, colored, superlinear };

// Named model pieces. Each takes the scalar parameters next to it in the config.
struct Presets {
  std::string drift = "zero";       // zero | constant | sine_forced | minus_one
  double drift_c = 1.0;
  std::string amplitude = "none";   // none | positive_part | constant | bounded
  double sigma = 1.0;
  std::string initial = "bump";     // zero | bump | ball
  std::string measure = "isotropic";  // isotropic | axes
};

struct ScenarioConfig {
  std::string name = "scenario";
  ScenarioKind kind = ScenarioKind::stochastic;
  DomainSpec domain = DomainSpec::interval(-1, 1);
  double h = 1.0 / 32;
  double alpha = 1.0;
  CovarianceSpec noise = CovarianceSpec::white();
  bool has_noise = false;
  Presets presets;
  Superlinear superlinear;
  std::vector<double> levels;  // truncation levels m
  Theorem theorem = Theorem::semilinear;
  ParameterSet gate;
  double T = 1.0, dt = 0.01;
  long n_paths = 1;
  std::uint64_t seed = 0;
  NoiseScheme scheme = NoiseScheme::explicit_increment;
  bool suite_positivity = false, suite_refinement = false;
  bool expected_fail = false;  // control scenario, the suite is expected to report a violation

  // Canonical key = value text over every field, sorted by section.
  std::string canonical() const;
  // SHA-256 of canonical(), lowercase hex.
  std::string hash() const;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Built-in scenarios; the names are listed by preset_names().
ScenarioConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

std::string sha256_hex(const std::string& bytes);
// Shortest decimal that reads back to the same double.
std::string format_double(double v);

// Model pieces assembled from a config.
Problem build_problem(const ScenarioConfig& cfg);
Problem build_problem(const ScenarioConfig& cfg, double h);
StableOperatorSpec build_operator(const ScenarioConfig& cfg);
GateVerdict evaluate_gate(const ScenarioConfig& cfg);

std::string kind_name(ScenarioKind k);
std::string theorem_name(Theorem t);

}  // namespace nlspde
