#pragma once

#include <vector>

#include "mcf/fields.hpp"

namespace mcf {

// Geometry of the normal graph M_u = {x + u n}. On round bases the graph is
// the radial graph r = rho + u over the sphere of radius rho = u.base_radius();
// on flat bases it is the ordinary height graph. n is the outward normal and
// H > 0 on convex hypersurfaces, so the flow speed in the direction of n is -wH.

/// Relative area element of M_u with respect to the base.
std::vector<double> area_element_v(const GraphFunction& u);
/// Speed factor w: normal velocity of M_u equals w times the height velocity.
std::vector<double> speed_w(const GraphFunction& u);
/// Mean curvature of M_u at x + u(x) n(x).
std::vector<double> mean_curvature_graph(const GraphFunction& u);
/// -w H_u, the height velocity of a graph moving by mean curvature.
std::vector<double> normal_speed(const GraphFunction& u);
/// |A|^2 of M_u (from the graph's metric and second fundamental form).
std::vector<double> second_fundamental_form_norm2(const GraphFunction& u);

/// L u = Delta u + |A|^2 u on the base of radius u.base_radius().
std::vector<double> linearized_L(const GraphFunction& u);

/// Q(u) = -w H_u + H0 - L u. Requires ||u||_{C^{0,1}} < 0.3 rho (round) or
/// 0.3 P / 2 pi (flat); throws GraphValidityError otherwise.
std::vector<double> nonlinearity_Q(const GraphFunction& u);
/// Q_t for a graph over the shrinking base M_t: the static formula with rho = R(t).
std::vector<double> nonlinearity_Q_t(const GraphFunction& u, const EvolvingGeometry& evolving, double t);

/// Smallness threshold for Q on a base of radius rho.
double graph_validity_threshold(const BaseGeometry& geom, double rho);

struct QuadraticBoundReport {
  double C = 0.0;
  /// Smallest constants that make the pointwise bounds hold on the grid.
  double fitted_single = 0.0;
  double fitted_difference = 0.0;
  bool pass_single = false;
  bool pass_difference = false;
  bool pass() const noexcept { return pass_single && pass_difference; }
};

/// Pointwise check of
///   |Q(u)| <= C (|u|^2 + |Du|^2 + |D^2u| (|Du| + |u|))
///   |Q(u) - Q(v)| <= C [ (|u|_{C01} + |v|_{C01}) (|u-v| + |D(u-v)| + |D^2(u-v)|)
///                        + (|D(u-v)| + |u-v|) |D^2 u| ].
/// `u` and `v` must share geometry and base radius.
QuadraticBoundReport check_quadratic_bounds(const GraphFunction& u, const GraphFunction& v, double C);

}  // namespace mcf
