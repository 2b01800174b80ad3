#pragma once

#include <cstdint>
#include <vector>

#include "mcf/fields.hpp"
#include "mcf/heat_kernels.hpp"
#include "mcf/parabolic_norms.hpp"

namespace mcf {

/// Mild-solution operators of a kernel, evaluated mode by mode. Mode j of a
/// source F evolves as  g_j(t) = int_0^t exp(mu_j (Phi(t) - Phi(s))) F_j(s) ds
/// with Phi = kernel.clock and mu_j = kernel.rate(j). Between stored time
/// nodes F_j is the cubic Lagrange interpolant through the four nearest
/// nodes, integrated against the exponential by Gauss-Legendre sub-panels.
class DuhamelOperator {
 public:
  explicit DuhamelOperator(KernelEvaluator kernel, int nodes_per_panel = 4);

  const KernelEvaluator& kernel() const noexcept { return kernel_; }
  int nodes_per_panel() const noexcept { return nodes_per_panel_; }

  /// int_M kernel(x, t; y, 0) f0(y) dy. Throws DomainError past extinction.
  GraphFunction propagate_initial(const GraphFunction& f0, double t) const;
  /// The same on every time node of `grid` (values of `grid` are ignored).
  SpaceTimeField propagate_initial(const GraphFunction& f0, const SpaceTimeField& grid) const;

  /// int_0^t int_M kernel(x, t; y, s) F(y, s) dy ds on every node of F.
  SpaceTimeField convolve(const SpaceTimeField& F) const;

 private:
  void check_grid(const BaseGeometry& geom) const;

  KernelEvaluator kernel_;
  int nodes_per_panel_;
};

struct PhysicalCheck {
  std::vector<std::size_t> points;
  std::vector<double> spectral;
  std::vector<double> physical;
  double max_abs = 0.0;
  /// max_abs divided by the largest |spectral| value (or 1 if all vanish).
  double max_rel = 0.0;
};

/// Evaluates convolve(F) at the final time of F and at the given grid points
/// a second way: direct quadrature of the kernel in space and time, with the
/// band t - s < band replaced by the mass-weighted delta approximation.
/// Supported on one-dimensional bases. `band` <= 0 selects the square of the
/// resampled grid spacing.
PhysicalCheck duhamel_physical_check(const DuhamelOperator& op, const SpaceTimeField& F,
                                     const std::vector<std::size_t>& points, double band = 0.0);

struct ProbeReport {
  double C_fit = 0.0;
  std::vector<double> ratios;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

struct ProbeOptions {
  double horizon = 0.05;
  int time_steps = 64;
  /// Largest wavenumber of the random fields; 0 selects N / 4.
  int bandlimit = 0;
  /// Highest power of t in the random time profiles.
  int time_degree = 2;
  NormOptions norms{.refinement_check = false};
};

/// Random space-time field with standard normal coefficients up to the
/// bandlimit and a polynomial time profile, reproducible from `seed`.
SpaceTimeField random_probe_field(const BaseGeometry& geom, const std::optional<EvolvingGeometry>& evolving,
                                  const ProbeOptions& options, std::uint64_t seed);

/// max over probes of xt_norm(convolve(Q)) / yt_norm(Q). The first probe is
/// Q = 1; probe k >= 1 uses random_probe_field with seed + k.
ProbeReport operator_norm_probe(const DuhamelOperator& op, std::size_t count, std::uint64_t seed,
                                const ProbeOptions& options = {});

}  // namespace mcf
