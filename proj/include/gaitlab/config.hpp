#ifndef GAITLAB_CONFIG_HPP
#define GAITLAB_CONFIG_HPP

#include "gaitlab/experiment.hpp"
#include "gaitlab/simulate.hpp"
#include "gaitlab/skeleton.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gaitlab {

/// Everything a run needs. Loaded from a flat text file of `key = value`
/// lines; `#` starts a comment. Lists are comma separated.
struct LabConfig {
  SkeletonConfig skeleton;
  SimulationConfig simulation;
  ExperimentConfig experiment;

  LabConfig();

  /// Applies one key; unknown keys and malformed values are Config errors
  /// that name the key.
  void set(const std::string& key, const std::string& value);

  /// Every key with its current value, one `key = value` per line, in a
  /// fixed order. Parsing the snapshot reproduces the config.
  std::string snapshot() const;

  void validate() const;
};

std::vector<std::string> config_keys();

LabConfig parse_config(const std::string& text);
LabConfig load_config(const std::filesystem::path& path);

/// Restricts groups, timesteps and dims, e.g. "groups=45-90;timesteps=30,5;dims=2,3".
/// Every selected value must already be part of the config.
void apply_grid_subset(ExperimentConfig& config, const std::string& subset);

}  // namespace gaitlab

#endif  // GAITLAB_CONFIG_HPP
