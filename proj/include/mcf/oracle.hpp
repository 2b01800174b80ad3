#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcf/fields.hpp"

namespace mcf {

enum class ExactKind { ShrinkingCircle, ShrinkingSphere, StaticFlat, ConcentricDifference };

std::string to_string(ExactKind kind);
ExactKind exact_kind_from_string(const std::string& name);

/// Closed-form solutions of the graphical flow. ShrinkingCircle/Sphere are
/// graphs over the static base of radius R0; ConcentricDifference is the
/// sphere of initial radius R0_prime written as a graph over the shrinking
/// base of initial radius R0. `dimension` is used by StaticFlat and
/// ConcentricDifference.
struct ExactSolution {
  ExactKind kind = ExactKind::ShrinkingCircle;
  double R0 = 1.0;
  double R0_prime = 1.05;
  int dimension = 1;

  int space_dimension() const;
  double extinction_time() const;
  bool over_evolving_base() const noexcept { return kind == ExactKind::ConcentricDifference; }
};

/// Throws DomainError at or beyond the extinction time.
double exact_eval(const ExactSolution& solution, const Point& x, double t);
double exact_time_derivative(const ExactSolution& solution, const Point& x, double t);

/// Samples the solution on `geom` (whose scale must be R0 for round kinds).
/// ConcentricDifference samples carry the shrinking base up to times.back().
SpaceTimeField exact_field(const ExactSolution& solution, const BaseGeometry& geom, std::vector<double> times);

/// Height velocity of the flow for a graph over a static base, from formulas
/// independent of graph_calculus: polar curvature on the circle, the
/// metric/second-fundamental-form matrices on the sphere, divergence form on
/// flat tori.
std::vector<double> oracle_velocity(const GraphFunction& u);

/// Method-of-lines solve of u_t = -wH from u0 over the static base. IMEX
/// Crank-Nicolson/Adams-Bashforth 2 with L = Delta + |A|^2 implicit in
/// spectral space and the remainder explicit; the first step is implicit
/// Euler. Returns `output_steps + 1` slices (0 means every step); `steps`
/// must be a multiple of `output_steps`. Throws GraphValidityError naming the
/// first time at which the graph stops being valid.
SpaceTimeField fd_solve(const BaseGeometry& geom, const GraphFunction& u0, double horizon, int steps,
                        int output_steps = 0);

struct CurvatureHistory {
  std::vector<double> times;
  /// |A| at every grid point, one row per time.
  std::vector<std::vector<double>> A;
  /// |nabla A| (arc-length derivative of the curvature); 1-D bases only,
  /// empty otherwise.
  std::vector<std::vector<double>> grad_A;
  std::vector<double> sup_A;
  std::vector<double> sup_grad_A;
  bool has_gradient() const noexcept { return !grad_A.empty(); }
};

/// Curvature of the surfaces r = R(t) + u (round) or of the height graphs
/// (flat), spectrally from each slice.
CurvatureHistory curvature_history(const SpaceTimeField& u);

struct CurvatureEstimate {
  /// sup |A| at t = 0.
  double kappa0 = 0.0;
  double sup_A = 0.0;
  /// sup_{[0,T]} |A| / kappa0.
  double ratio = 0.0;
  /// sup over t > 0 of sup |nabla A|^2 / (kappa0^2 (1 + 1/t)); NaN without gradient data.
  double C1 = 0.0;
};

CurvatureEstimate curvature_estimates(const CurvatureHistory& history);

}  // namespace mcf
