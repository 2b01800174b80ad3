#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mcf::cli {

/// Invalid configuration; `line` is 1-based (0 when no position is known).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct GeometryConfig {
  std::string kind = "Circle";
  double scale = 1.0;
  int N = 128;
  int dimension() const;
};

struct PicardSection {
  double tolerance = 1e-9;
  int max_iterations = 60;
  /// Ball radius for runs that do not fit their own (oracle-compare).
  double delta = 0.15;
};

struct FitSection {
  int operator_probes = 20;
  int pair_probes = 20;
  int initial_probes = 10;
  int bandlimit = 0;
  double ball_fraction = 0.5;
  int max_rounds = 6;
};

struct ExistenceSection {
  double error_bound = 1e-3;
  bool oracle = true;
  int oracle_substeps = 4;
  int contraction_pairs = 10;
};

struct PerturbationSection {
  std::vector<double> epsilons{1e-3, 1e-2};
  int mode = 3;
  double uniformity = 0.2;
  double refinement_tolerance = 0.1;
  int max_alpha = 1;
  int max_k = 1;
  double curvature_factor = 2.0;
};

struct KernelBoundsSection {
  double D = 2.0;
  std::vector<std::string> kernels{"G", "K", "G_evolving", "K_evolving"};
  double t_min = 1e-3;
  double t_max = 0.25;
  int time_samples = 48;
  int distance_samples = 96;
  double extension = 16.0;
  double evolving_horizon = 0.3;
  double mass_tolerance_G = 1e-10;
  double mass_tolerance_K = 1e-8;
};

struct ContractionSection {
  std::string map = "existence";
  int pairs = 50;
  std::vector<double> delta_factors{0.25, 0.5, 1.0};
  double bound = 0.5;
  int mode = 3;
};

struct OracleCompareSection {
  std::vector<std::string> cases{"ShrinkingCircle", "ShrinkingSphere", "StaticFlat", "ConcentricDifference"};
  int random_graphs = 5;
  double amplitude = 1e-2;
  int oracle_substeps = 4;
  double error_bound = 1e-3;
  int sphere_N = 32;
  double sphere_horizon = 0.02;
  double R0_prime = 1.05;
};

struct NormsSection {
  double tolerance = 1e-10;
  int random_pairs = 4;
};

struct PlotSection {
  std::string input;
  /// heatmap | line | auto (heatmap for field snapshots, line otherwise).
  std::string style = "auto";
  std::string output;
  std::string title;
  std::string x_column;
  std::vector<std::string> y_columns;
};

struct ExperimentConfig {
  std::string experiment;
  GeometryConfig geometry;
  int J = 128;
  double horizon = 0.05;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string output_dir = "out";
  PicardSection picard;
  FitSection fit;
  ExistenceSection existence;
  PerturbationSection perturbation;
  KernelBoundsSection kernel_bounds;
  ContractionSection contraction;
  OracleCompareSection oracle_compare;
  NormsSection norms;
  PlotSection plot;
};

const std::vector<std::string>& experiment_names();

/// Parses YAML text. Unknown keys, wrong types and out-of-range values raise
/// ConfigError with the line of the offending entry. `experiment` is the
/// subcommand; a mismatching `experiment:` key is an error.
ExperimentConfig parse_config(const std::string& text, const std::string& experiment);
ExperimentConfig load_config(const std::string& path, const std::string& experiment);

/// Fully resolved configuration, defaults included.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace mcf::cli
