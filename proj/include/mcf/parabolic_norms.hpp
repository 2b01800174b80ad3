#pragma once

#include <cstddef>
#include <vector>

#include "mcf/fields.hpp"

namespace mcf {

struct NormOptions {
  /// Recompute the cylinder term on every other time node and flag the
  /// report as unstable if the two differ by more than 2%.
  bool refinement_check = true;
  /// Evaluate an evolving field with the fixed initial metric instead of g(t).
  bool fixed_metric = false;
};

struct NormReport {
  double value = 0.0;
  double sup_u = 0.0;
  double sup_grad = 0.0;
  /// sup_x sup_r r^{2/(n+4)} ||f||_{L^{n+4}(Omega(x,r))} (f = D^2u for X, Q for Y).
  double hessian_term = 0.0;
  std::size_t argmax_x = 0;
  double argmax_r = 0.0;
  std::size_t ladder_size = 0;
  bool refinement_stable = true;
};

/// r_j = sqrt(T) 2^{-j/2} for j = 0, 1, ... while r_j is at least the grid spacing.
std::vector<double> dyadic_ladder(const BaseGeometry& geom, double T);

/// Throws DomainError if some cylinder of the ladder spans fewer than two
/// time steps, or if the field does not cover [0, T].
NormReport xt_norm(const SpaceTimeField& u, double T, const NormOptions& options = {});
NormReport yt_norm(const SpaceTimeField& q, double T, const NormOptions& options = {});

/// sup |f| + sup |grad f| in the metric of radius f.base_radius().
double c01_norm(const GraphFunction& f);

}  // namespace mcf
