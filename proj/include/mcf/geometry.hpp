#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mcf {

/// Model base hypersurfaces. All have constant |A|^2 and constant H0, which is
/// what makes their heat kernels exactly evaluable.
enum class BaseKind { Circle, PeriodicLine, PeriodicPlane, Sphere };

std::string to_string(BaseKind kind);
BaseKind base_kind_from_string(const std::string& name);

/// Intrinsic coordinates of a point: angle (Circle), x (PeriodicLine),
/// (x, y) (PeriodicPlane) or (colatitude, longitude) (Sphere).
using Point = std::array<double, 2>;

/// Spatial derivatives of a sampled field, expressed in an orthonormal frame
/// of the metric the jet was requested for. Hessian entries are covariant.
struct FieldJet {
  int dimension = 1;
  std::vector<double> value;
  std::array<std::vector<double>, 2> grad;  // grad[1] unused for n = 1
  std::array<std::vector<double>, 3> hess;  // (11, 12, 22); only [0] for n = 1

  double grad_norm(std::size_t i) const;
  double hess_norm(std::size_t i) const;  // Frobenius
  double laplacian(std::size_t i) const;
};

namespace detail {
struct GeometryData;
}

/// Immutable value type; copies share the precomputed transform tables.
class BaseGeometry {
 public:
  BaseKind kind() const noexcept;
  int dimension() const noexcept;
  /// Radius for Circle/Sphere, period for the flat tori.
  double scale() const noexcept;
  int grid_size() const noexcept;
  bool is_round() const noexcept;

  double a_squared() const noexcept;
  double mean_curvature() const noexcept;
  double kappa() const noexcept;
  double injectivity_radius() const noexcept;
  /// 0.3 * min(R, period / 2pi).
  double graph_validity_threshold() const noexcept;
  /// Largest spacing between neighbouring grid points, in the base metric.
  double grid_spacing() const noexcept;

  std::size_t point_count() const noexcept;
  Point point(std::size_t i) const;
  /// Quadrature weights for integration against the base volume measure.
  std::span<const double> weights() const noexcept;
  double total_volume() const noexcept;

  /// Real spectral coefficients (interleaved real/imaginary parts).
  std::size_t coefficient_count() const noexcept;
  /// Wavenumber of a coefficient: k (1-D), max(|kx|,|ky|) (plane), l (sphere).
  int degree(std::size_t j) const;
  /// Eigenvalue of the angular Laplacian (round) or of the flat Laplacian.
  double unit_eigenvalue(std::size_t j) const;
  /// Eigenvalue of the Laplace-Beltrami operator of the base itself.
  double laplacian_eigenvalue(std::size_t j) const;
  /// Eigenvalues of the base Laplacian, one per distinct eigenspace up to the bandlimit.
  std::vector<double> eigenvalues() const;

  std::vector<double> analyze(std::span<const double> values) const;
  std::vector<double> synthesize(std::span<const double> coefficients) const;

  /// Derivatives with respect to the metric of radius `radius` (round bases).
  /// Flat bases ignore the argument.
  FieldJet jet(std::span<const double> values, double radius) const;
  FieldJet jet(std::span<const double> values) const;

  /// Band-limited interpolation of a 1-D field onto `count` >= N uniform points.
  std::vector<double> resample(std::span<const double> values, int count) const;

 private:
  friend BaseGeometry make_base(BaseKind, int, double, int);
  std::shared_ptr<const detail::GeometryData> data_;
};

/// Throws std::invalid_argument for odd or too-small grids, nonpositive
/// scale, or a kind/dimension mismatch.
BaseGeometry make_base(BaseKind kind, int dimension, double radius_or_period, int grid_size);

/// Intrinsic distance (great circle on round bases, periodic wrap on flats).
double geodesic_distance(const BaseGeometry& geom, const Point& x, const Point& y);

double unit_ball_volume(int dimension);

/// Exact volume of the intrinsic ball; requires 0 < r < injectivity radius.
double ball_volume(const BaseGeometry& geom, const Point& x, double r);

struct VolumeBoundCheck {
  double volume = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

/// Two-sided comparison  w_n r^n / 2 <= Vol(B_r) <= 2 w_n r^n.
VolumeBoundCheck check_volume_bounds(const BaseGeometry& geom, const Point& x, double r);

/// Radius below which the two-sided volume comparison is asserted: half the
/// injectivity radius. (On the sphere the lower bound fails near pi R.)
double volume_comparison_radius(const BaseGeometry& geom);

/// Round base moving by mean curvature flow: R(t) = sqrt(R0^2 - 2 n t).
class EvolvingGeometry {
 public:
  /// `base` must be a Circle or Sphere; its radius is R0. Requires
  /// 0 < horizon < R0^2 / (2n).
  EvolvingGeometry(BaseGeometry base, double horizon);

  const BaseGeometry& base() const noexcept { return base_; }
  double initial_radius() const noexcept { return base_.scale(); }
  double horizon() const noexcept { return horizon_; }
  double extinction_time() const noexcept;

  double radius(double t) const;
  /// tau(t) = int_0^t R(s)^-2 ds.
  double conformal_time(double t) const;

 private:
  BaseGeometry base_;
  double horizon_;
};

double shrink_radius(const EvolvingGeometry& evolving, double t);
double conformal_time(const EvolvingGeometry& evolving, double t);

}  // namespace mcf
