#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace mcf::cli {

/// One asserted inequality. `relation` reads "value <relation> limit".
struct Bound {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;
  bool pass = false;
  std::string note;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<Bound> bounds;
  nlohmann::json fitted_constants = nlohmann::json::object();
  nlohmann::json max_errors = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::object();
  /// Artifact file name (relative to the output directory) and contents.
  std::vector<std::pair<std::string, std::string>> files;

  bool pass() const;
  std::vector<std::string> failures() const;
};

/// Runs the named experiment. Semantic config problems raise ConfigError;
/// failed assertions are recorded as failing bounds.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace mcf::cli
