#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhist/histories.hpp"
#include "qhist/spin_model.hpp"

namespace qhist {

inline constexpr const char* kVersion = "0.3.0";

// Experiments understood by run().
const std::vector<std::string>& experiment_names();
bool is_randomized(const std::string& experiment);

struct ExperimentConfig {
  std::string experiment;
  ModelParams model;
  double tau_r = 20.0;

  // Waiting time as a fraction of tau_r (beta_sweep, size_scaling,
  // manystep_*, estimate).
  double tau_fraction = 0.5;
  // tau_sweep grid; defaults to 0.05, 0.10, ..., 1.00.
  std::vector<double> tau_fractions;
  std::vector<double> betas{0.2, 0.5, 1.0};
  std::vector<int> sizes{12, 16};

  std::vector<Slot> consistency_path{Slot::measure(2), Slot::gap(), Slot::measure(0)};
  std::vector<Slot> markov_path{Slot::measure(2), Slot::measure(0), Slot::measure(0)};

  // relax
  Label initial_label = 0;
  double t_max = 40.0;
  double t_step = 0.5;
  bool fit_rates = true;

  // manystep_*
  Label uniform_label = 0;
  int lambda_max = 20;
  int trajectories = 4;

  // randomized experiments
  std::optional<std::uint64_t> seed;
  int samples = 200;
  std::vector<long> dims{8, 16, 32, 64, 128};
  std::string rank_scheme = "thirds";

  // estimate: path is consistency_path
  std::string output_dir = "out";
  int threads = 0;
};

struct Diagnostic {
  std::string field;
  std::string reason;
};

// Parses a config; problems with individual fields are reported as
// diagnostics rather than thrown.
ExperimentConfig parse_config(const nlohmann::json& j, std::vector<Diagnostic>& diagnostics);
nlohmann::json config_to_json(const ExperimentConfig& config);

// Empty iff run() would start.
std::vector<Diagnostic> validate(const ExperimentConfig& config);

struct RunResult {
  std::vector<std::string> files;  // relative to output_dir
  std::string summary;
  nlohmann::json manifest;
};

// Runs the experiment and writes its CSV files, manifest.json and
// summary.txt into config.output_dir.
RunResult run(const ExperimentConfig& config);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);

// First grid time at which every population lies within `band` of its mean
// over the second half of the grid; negative if none.
double empirical_relaxation_time(const std::vector<double>& t, const RMatrix& populations,
                                 double band = 0.02);

}  // namespace qhist
