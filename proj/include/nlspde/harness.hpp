#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nlspde/analysis.hpp"
#include "nlspde/config.hpp"

namespace nlspde {

enum class ExitCode : int { ok = 0, suite_failure = 1, gate_failure = 2, config_error = 3, io_error = 4 };

struct GateRefused : std::runtime_error {
  GateVerdict verdict;
  explicit GateRefused(GateVerdict v);
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Output directory from SPDE_OUT_DIR, else ./spde_out.
std::filesystem::path output_dir();

// Write to a sibling temp file, then rename over the target.
void write_atomic(const std::filesystem::path& target, const std::string& bytes);

struct OutputFile {
  std::string path;
  std::string sha256;
};

struct SuiteRow {
  std::string label;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::string name;
  std::vector<SuiteRow> rows;
  bool pass = false;           // every row passed
  bool expected_fail = false;  // control: a failing row is the intended outcome
  // pass for ordinary suites, !pass for controls
  bool as_expected() const { return expected_fail ? !pass : pass; }
  std::string outcome() const;
  std::string table() const;
};

struct PathSeed {
  std::uint64_t master = 0, path = 0;
};

struct RunManifest {
  std::string config_hash;
  std::string code_version;
  GateVerdict gate;
  bool gate_overridden = false;
  std::vector<PathSeed> seeds;
  std::vector<OutputFile> outputs;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> suites;  // suite name -> outcome
  std::string json() const;
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty means output_dir()
  bool override_gate = false;
  long paths = -1;                // overrides the config when positive
  std::uint64_t seed = 0;
  bool has_seed = false;
};

const char* code_version();

// gate, simulate, analyze, then CSV files and the manifest, each written atomically.
RunManifest run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

// All sample paths of a stochastic, parabolic or superlinear scenario.
std::vector<Trajectory> simulate_paths(const ScenarioConfig& cfg, const Problem& prob);

// min over paths, times and nodes; pass iff >= -1e-8
SuiteReport positivity_suite(const ScenarioConfig& cfg);

// h against h/2 on the scenario's own quantities.
SuiteReport refinement_suite(const ScenarioConfig& cfg);

constexpr double kPositivityFloor = -1e-8;

// Shared pieces of the suites.
struct RefinementNumbers {
  double ratio_h = 0.0, ratio_h2 = 0.0;  // solution norm over data norm
  double decay_h = 0.0, decay_h2 = 0.0;
};
RefinementNumbers refinement_numbers(const ScenarioConfig& cfg);

struct CovarianceCheck {
  double rel_frobenius = 0.0;
  int nodes = 0;
  long draws = 0;
  int rank = 0;
};
// Empirical covariance of `draws` increments against dt C.
CovarianceCheck covariance_check(const CovarianceSpec& spec, const Grid& grid, double dt, long draws,
                                 std::uint64_t seed);

}  // namespace nlspde
