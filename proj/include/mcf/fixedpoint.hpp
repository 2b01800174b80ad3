#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mcf/duhamel.hpp"
#include "mcf/fields.hpp"

namespace mcf {

/// Constants of the existence argument: C1 for the Duhamel operator X <- Y,
/// C2 for the quadratic nonlinearity, C3 for the constant source H0.
struct ExistenceConstants {
  double C1 = 0.0, C2 = 0.0, C3 = 0.0;
};

/// Constants of the continuous-dependence argument: C4 for the evolving
/// Duhamel operator, C5 for Q_t, C6 for initial-data propagation.
struct PerturbationConstants {
  double C4 = 0.0, C5 = 0.0, C6 = 0.0;
};

struct PicardConfig {
  double horizon = 0.05;
  double delta = 0.1;
  double tolerance = 1e-9;
  int max_iterations = 60;
  int time_steps = 128;
  std::uint64_t seed = 1;
  ExistenceConstants existence;
  PerturbationConstants perturbation;
};

struct FlowSolution {
  SpaceTimeField u;
  /// X_T distance between successive iterates, one per iteration.
  std::vector<double> distances;
  /// distances[m] / distances[m - 1].
  std::vector<double> ratios;
  /// X_T norm of G(u) - u for the returned u.
  double residual = 0.0;
  double norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct ExistenceChoice {
  double delta = 0.0;
  double horizon = 0.0;
  double sqrt_T = 0.0;
};

/// delta = 1 / (4 C1 C2),  sqrt T = min{(8 C1 C2 C3 ||H0||)^{-1}, i0 / 2}.
ExistenceChoice choose_constants(const BaseGeometry& geom, const ExistenceConstants& c);

struct PerturbationChoice {
  double delta = 0.0;
  double epsilon = 0.0;
};

/// delta = 1 / (4 C4 C5) and epsilon = delta / C6, with delta capped at
/// `delta_cap` (the radius the constants were fitted on).
PerturbationChoice choose_perturbation_constants(const PerturbationConstants& c, double delta_cap);

struct FitOptions {
  std::size_t operator_probes = 20;
  std::size_t pair_probes = 20;
  std::size_t initial_probes = 10;
  int time_steps = 128;
  /// Largest wavenumber of random iterands; 0 selects N / 8.
  int bandlimit = 0;
  /// Radius of the X_T ball the quadratic constant is fitted on, as a
  /// fraction of the graph validity threshold.
  double ball_fraction = 0.5;
  int max_rounds = 6;
};

struct ExistenceFit {
  ExistenceConstants constants;
  ExistenceChoice choice;
  /// Horizon the constants were fitted on; the recipe returned at least this.
  double fitted_horizon = 0.0;
  double ball_radius = 0.0;
  bool delta_capped = false;
  int rounds = 0;
};

/// Fits C1, C2, C3 by probes at a horizon, applies the recipe, and repeats at
/// the recipe's horizon until it no longer shrinks. delta is capped at the
/// radius of the ball C2 was fitted on.
ExistenceFit fit_existence_constants(const BaseGeometry& geom, double initial_horizon, std::uint64_t seed,
                                     const FitOptions& options = {});

struct PerturbationFit {
  PerturbationConstants constants;
  PerturbationChoice choice;
  double ball_radius = 0.0;
  bool delta_capped = false;
};

PerturbationFit fit_perturbation_constants(const EvolvingGeometry& evolving, double horizon, std::uint64_t seed,
                                           const FitOptions& options = {});

/// Picard iteration u <- D_K(-H0 + Q(u)) from u = 0 (or `initial`). Throws
/// BallExitError if an iterate leaves the delta-ball and ConvergenceError if
/// the tolerance is not met within max_iterations.
FlowSolution solve_existence(const BaseGeometry& geom, const PicardConfig& config,
                             const std::optional<SpaceTimeField>& initial = std::nullopt);

/// Picard iteration u <- P_K~ u0 + D_K~(Q_t(u)) over the shrinking base.
/// Throws PreconditionError if ||u0||_{C01} exceeds `epsilon` (when positive).
FlowSolution solve_perturbation(const EvolvingGeometry& evolving, const GraphFunction& u0, const PicardConfig& config,
                                double epsilon = 0.0);

enum class MapKind { Existence, Perturbation };

struct ContractionReport {
  double sup_ratio = 0.0;
  std::vector<double> ratios;
  std::size_t pairs = 0;
  std::uint64_t seed = 0;
};

/// max over random pairs u1 != u2 in the delta-ball (sharing the initial
/// slice) of X(G(u1) - G(u2)) / X(u1 - u2). For the perturbation map `u0`
/// sets the common initial slice. The last pair is u2 = u1 + tiny change.
ContractionReport measure_contraction(MapKind map, const BaseGeometry& geom,
                                      const std::optional<EvolvingGeometry>& evolving, double delta, double horizon,
                                      std::size_t pairs, std::uint64_t seed,
                                      const std::optional<GraphFunction>& u0 = std::nullopt,
                                      const FitOptions& options = {});

/// Random admissible iterate with u(., 0) = 0 and X_T norm `radius`.
SpaceTimeField random_iterate(const BaseGeometry& geom, const std::optional<EvolvingGeometry>& evolving,
                              double horizon, int time_steps, int bandlimit, double radius, std::uint64_t seed);

struct DerivativeEstimate {
  int alpha = 0;
  int k = 0;
  double sup = 0.0;
  /// sup / ||u0||_{C01}, or sup itself when u0 = 0.
  double C = 0.0;
};

/// sup over grid and t in (0, T] of |(t^{1/2} grad)^alpha (t d_t)^k grad u|.
/// alpha <= 2 on 1-D bases, alpha <= 1 on 2-D bases; k <= 1. Time derivatives
/// by centred differences on the stored grid.
std::vector<DerivativeEstimate> derivative_estimates(const SpaceTimeField& u, int max_alpha, int max_k);

}  // namespace mcf
