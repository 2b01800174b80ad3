#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "mcf/geometry.hpp"

namespace mcf {

/// G: d_t - Delta.  K: d_t - Delta - |A|^2.  The evolving variants use the
/// metric g(t) of the shrinking round base.
enum class KernelKind { G, K, G_evolving, K_evolving };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Exact kernels on the model bases, as densities with respect to the
/// Riemannian measure of the source time s. Circle and line kernels use the
/// image sum for (t - s) / rho^2 below the switch threshold and the
/// eigen-series otherwise; sphere kernels always use the Legendre series.
class KernelEvaluator {
 public:
  static KernelEvaluator heat(BaseGeometry geom);
  static KernelEvaluator schrodinger(BaseGeometry geom);
  static KernelEvaluator evolving_heat(EvolvingGeometry evolving);
  static KernelEvaluator evolving_schrodinger(EvolvingGeometry evolving);

  KernelKind kind() const noexcept { return kind_; }
  const BaseGeometry& geometry() const noexcept { return geom_; }
  const std::optional<EvolvingGeometry>& evolving() const noexcept { return evolving_; }
  bool has_potential() const noexcept { return kind_ == KernelKind::K || kind_ == KernelKind::K_evolving; }
  /// Highest spatial derivative order with a certified bound (2 for G, 1 for K).
  int max_order() const noexcept { return has_potential() ? 1 : 2; }

  /// Switch between image sum and eigen-series, in units of (t - s) / rho^2.
  double switch_threshold() const noexcept { return switch_threshold_; }
  void set_switch_threshold(double value) { switch_threshold_ = value; }
  /// Maximal number of series terms before evaluation is declared unreliable.
  int max_terms() const noexcept { return max_terms_; }
  void set_max_terms(int value) { max_terms_ = value; }

  double eval(const Point& x, double t, const Point& y, double s) const;
  /// Order 1 or 2. On 1-D bases the signed arc-length derivative in x; on
  /// 2-D bases the norm of the gradient or the Frobenius norm of the Hessian.
  double derivative(int order, const Point& x, double t, const Point& y, double s) const;
  /// |D^order kernel| * exp(log_weight), evaluated without underflow when the
  /// kernel is far below the smallest double but the product is not.
  double weighted_magnitude(int order, const Point& x, double t, const Point& y, double s, double log_weight) const;
  /// Integral over y of the kernel, by quadrature.
  double mass(const Point& x, double t, double s) const;

  /// Distance d_{g(t)}(x, y) used in the Gaussian bounds.
  double distance(const Point& x, const Point& y, double t) const;

  /// Time variable in which the per-mode evolution is exponential: t for
  /// static kernels, conformal time for evolving ones.
  double clock(double t) const;
  /// Exponential rate of coefficient j per unit clock.
  double rate(std::size_t j) const;

 private:
  KernelEvaluator(KernelKind kind, BaseGeometry geom, std::optional<EvolvingGeometry> evolving);
  void check_times(double t, double s) const;
  double evaluate(int order, const Point& x, double t, const Point& y, double s, double shift) const;

  KernelKind kind_;
  BaseGeometry geom_;
  std::optional<EvolvingGeometry> evolving_;
  double switch_threshold_ = 0.1;
  int max_terms_;
};

struct BoundSamples {
  double t_min = 1e-3;
  double t_max = 0.25;
  int time_samples = 48;       // log-spaced over [t_min, t_max]
  int distance_samples = 96;   // uniform over [0, largest distance]
  /// Samples on [t_min / extension, t_min] probe whether C keeps its size
  /// below the sampled scales.
  double extension = 16.0;
};

struct GaussianBoundCertificate {
  KernelKind kind = KernelKind::G;
  int order = 0;
  double D = 2.0;
  /// max over the sample of |D^k kernel| (t-s)^{(n+k)/2} exp(d^2 / (4 D (t-s))).
  double C = 0.0;
  /// The same maximum over the smallest decade and over the extension band.
  double C_reference = 0.0;
  double C_extended = 0.0;
  /// Off-diagonal form with t in place of t - s for (y, s) outside Omega(x, t).
  double off_diagonal_C = 0.0;
  double off_diagonal_reference = 0.0;
  double off_diagonal_extended = 0.0;
  /// 1 - C_extended / (1.05 C_reference), worst over both forms.
  double margin = 0.0;
  std::size_t samples = 0;
  double t_min = 0.0;
  double t_max = 0.0;
  bool pass = false;
};

/// Fits C for the Gaussian bound of the given derivative order and declares
/// PASS when the constant is scale uniform: shrinking t - s by the extension
/// factor below t_min may not raise it by more than 5%. Throws
/// UnsupportedError for orders the kernel has no bound for and DomainError if
/// the series cannot be truncated at the smallest time.
GaussianBoundCertificate certify_gaussian_bound(const KernelEvaluator& ev, int order, double D,
                                                const BoundSamples& samples = {});

}  // namespace mcf
