#pragma once

// Run configuration: YAML file with nested sections and strict key checking.

#include "autofocus/simulate.hpp"
#include "autofocus/solvers.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace autofocus {

/// Invalid or unknown configuration entry. `where` is "line:column" when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RandomTargets {
  int count = 0;
  double min_amplitude = 0.3;
  double max_amplitude = 1.0;
  /// Layout draw; the run seed is used when absent.
  std::optional<std::uint64_t> layout_seed;
};

struct BaselineConfig {
  GainModel gain_model = GainModel::per_frequency;
  bool per_position = true;
  double sparsity_weight = 0.01;
  int outer_iters = 50;
  int inner_iters = 20;
  double max_delay = 1e-9;
  int delay_samples = 2001;
};

struct OutputConfig {
  bool write_pgm = true;
  bool write_svg = true;
  int roc_thresholds = 200;
  int align_max_shift = 4;
};

struct RunConfig {
  std::uint64_t seed = 1;
  ExperimentSpec experiment;
  std::optional<RandomTargets> random_targets;
  SolverConfig solver;
  /// sigma = sigma_scale * measured noise norm unless solver.sigma is given explicitly.
  double sigma_scale = 1.0;
  bool sigma_explicit = false;
  BaselineConfig baseline;
  OutputConfig output;

  /// Experiment with the run seed applied and random targets drawn.
  ExperimentSpec resolved_experiment() const;
};

RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);

/// Every key with its default value, as YAML.
std::string config_schema();

/// Round-trippable YAML of a configuration (after resolving random targets).
std::string dump_config(const RunConfig& cfg);

}  // namespace autofocus
