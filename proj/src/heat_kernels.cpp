#include "mcf/heat_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mcf/errors.hpp"
#include "mcf/quadrature.hpp"
#include "parallel.hpp"

namespace mcf {

namespace {

constexpr double kPi = std::numbers::pi;

struct Jet1 {
  double value = 0.0, d1 = 0.0, d2 = 0.0;
};

[[noreturn]] void truncation_failure(double tau) {
  std::ostringstream msg;
  msg << "kernel series truncation insufficient at (t - s) / rho^2 = " << tau
      << "; raise the small-time switch threshold or the smallest sampled t - s";
  throw DomainError(msg.str());
}

// Heat kernel of d_t - d_xx on a circle of radius rho, at signed arc offset
// delta and elapsed time tau, with its first two delta-derivatives, all
// multiplied by exp(shift). The shift enters the image exponents so that
// Gaussian-weighted values survive where the kernel itself underflows.
Jet1 circle_kernel(double delta, double tau, double rho, double threshold, int max_terms, double shift = 0.0) {
  const double L = 2.0 * kPi * rho;
  delta = std::remainder(delta, L);
  const double unit = tau / (rho * rho);
  Jet1 out;
  if (unit < threshold) {
    const double norm = 1.0 / std::sqrt(4.0 * kPi * tau);
    for (int m = 0;; ++m) {
      double added = 0.0;
      for (int sgn : {1, -1}) {
        if (m == 0 && sgn == -1) continue;
        const double z = delta + sgn * m * L;
        const double g = norm * std::exp(shift - z * z / (4.0 * tau));
        const double q = z / (2.0 * tau);
        out.value += g;
        out.d1 += -q * g;
        out.d2 += (q * q - 1.0 / (2.0 * tau)) * g;
        added = std::max(added, g * (1.0 + q * q + 1.0 / tau));
      }
      if (m >= 1 && added < 1e-18 * std::max(out.value, 1e-300)) break;
      if (m > max_terms) truncation_failure(unit);
    }
    return out;
  }
  double v = 0.0, a = 0.0, b = 0.0;
  const double theta = delta / rho;
  for (int k = 1;; ++k) {
    const double e = std::exp(-static_cast<double>(k) * k * unit);
    const double kk = k / rho;
    v += e * std::cos(k * theta);
    a += -kk * e * std::sin(k * theta);
    b += -kk * kk * e * std::cos(k * theta);
    if (e * (1.0 + kk * kk) < 1e-17) break;
    if (k >= max_terms) truncation_failure(unit);
  }
  const double f = std::exp(shift) / L;
  out.value = (1.0 + 2.0 * v) * f;
  out.d1 = 2.0 * a * f;
  out.d2 = 2.0 * b * f;
  return out;
}

struct SphereJet {
  double value = 0.0;  // S(gamma)
  double d1 = 0.0;     // dS/dgamma
  double d2 = 0.0;     // d2S/dgamma2
  double tangential = 0.0;  // cot(gamma) dS/dgamma
};

// Heat kernel of the unit 2-sphere at geodesic angle gamma, time tau.
SphereJet sphere_kernel(double gamma, double tau, int max_terms) {
  const double x = std::cos(gamma), s = std::sin(gamma);
  double P0 = 1.0, P1 = x, dP0 = 0.0, dP1 = 1.0, ddP0 = 0.0, ddP1 = 0.0;
  double sum = 0.0, sum_d = 0.0, sum_dd = 0.0;
  for (int l = 0;; ++l) {
    double P, dP, ddP;
    if (l == 0) {
      P = P0, dP = dP0, ddP = ddP0;
    } else if (l == 1) {
      P = P1, dP = dP1, ddP = ddP1;
    } else {
      P = ((2.0 * l - 1.0) * x * P1 - (l - 1.0) * P0) / l;
      dP = dP0 + (2.0 * l - 1.0) * P1;
      ddP = ddP0 + (2.0 * l - 1.0) * dP1;
      P0 = P1, P1 = P;
      dP0 = dP1, dP1 = dP;
      ddP0 = ddP1, ddP1 = ddP;
    }
    const double c = (2.0 * l + 1.0) / (4.0 * kPi) * std::exp(-static_cast<double>(l) * (l + 1.0) * tau);
    sum += c * P;
    sum_d += c * dP;
    sum_dd += c * ddP;
    const double ll = static_cast<double>(l);
    if (l > 2 && c * (1.0 + ll * ll * ll * ll) < 1e-16) break;
    if (l >= max_terms) truncation_failure(tau);
  }
  SphereJet out;
  out.value = sum;
  out.d1 = -s * sum_d;
  out.d2 = sum_dd * s * s - sum_d * x;
  out.tangential = -x * sum_d;
  return out;
}

double angle_between(const Point& x, const Point& y) {
  const double ax = std::sin(x[0]) * std::cos(x[1]), ay = std::sin(x[0]) * std::sin(x[1]), az = std::cos(x[0]);
  const double bx = std::sin(y[0]) * std::cos(y[1]), by = std::sin(y[0]) * std::sin(y[1]), bz = std::cos(y[0]);
  const double cx = ay * bz - az * by, cy = az * bx - ax * bz, cz = ax * by - ay * bx;
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), ax * bx + ay * by + az * bz);
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::G:
      return "G";
    case KernelKind::K:
      return "K";
    case KernelKind::G_evolving:
      return "G_evolving";
    case KernelKind::K_evolving:
      return "K_evolving";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "G") return KernelKind::G;
  if (name == "K") return KernelKind::K;
  if (name == "G_evolving") return KernelKind::G_evolving;
  if (name == "K_evolving") return KernelKind::K_evolving;
  throw std::invalid_argument("unknown kernel '" + name + "' (expected G, K, G_evolving or K_evolving)");
}

KernelEvaluator::KernelEvaluator(KernelKind kind, BaseGeometry geom, std::optional<EvolvingGeometry> evolving)
    : kind_(kind), geom_(std::move(geom)), evolving_(std::move(evolving)) {
  max_terms_ = geom_.kind() == BaseKind::Sphere ? 4096 : 64;
}

KernelEvaluator KernelEvaluator::heat(BaseGeometry geom) { return {KernelKind::G, std::move(geom), std::nullopt}; }
KernelEvaluator KernelEvaluator::schrodinger(BaseGeometry geom) {
  return {KernelKind::K, std::move(geom), std::nullopt};
}
KernelEvaluator KernelEvaluator::evolving_heat(EvolvingGeometry evolving) {
  BaseGeometry base = evolving.base();
  return {KernelKind::G_evolving, std::move(base), std::move(evolving)};
}
KernelEvaluator KernelEvaluator::evolving_schrodinger(EvolvingGeometry evolving) {
  BaseGeometry base = evolving.base();
  return {KernelKind::K_evolving, std::move(base), std::move(evolving)};
}

void KernelEvaluator::check_times(double t, double s) const {
  if (!(s < t)) throw DomainError("kernel: requires s < t");
  if (s < 0.0) throw DomainError("kernel: requires s >= 0");
  if (evolving_ && t >= evolving_->extinction_time())
    throw DomainError("kernel: t at or past extinction of the base flow");
}

double KernelEvaluator::clock(double t) const { return evolving_ ? evolving_->conformal_time(t) : t; }

double KernelEvaluator::rate(std::size_t j) const {
  if (evolving_) return geom_.unit_eigenvalue(j) + (has_potential() ? geom_.dimension() : 0.0);
  return geom_.laplacian_eigenvalue(j) + (has_potential() ? geom_.a_squared() : 0.0);
}

double KernelEvaluator::distance(const Point& x, const Point& y, double t) const {
  const double d = geodesic_distance(geom_, x, y);
  return evolving_ ? d * evolving_->radius(t) / evolving_->initial_radius() : d;
}

double KernelEvaluator::eval(const Point& x, double t, const Point& y, double s) const {
  check_times(t, s);
  return evaluate(0, x, t, y, s, 0.0);
}

double KernelEvaluator::derivative(int order, const Point& x, double t, const Point& y, double s) const {
  if (order != 1 && order != 2) throw std::invalid_argument("kernel derivative: order must be 1 or 2");
  if (order == 2 && has_potential())
    throw UnsupportedError("kernel derivative: no second-derivative estimate exists for " + to_string(kind_) +
                           "; only first derivatives are bounded");
  check_times(t, s);
  return evaluate(order, x, t, y, s, 0.0);
}

double KernelEvaluator::weighted_magnitude(int order, const Point& x, double t, const Point& y, double s,
                                           double log_weight) const {
  if (order < 0 || order > max_order())
    throw UnsupportedError("kernel: no order-" + std::to_string(order) + " derivative for " + to_string(kind_));
  check_times(t, s);
  return std::abs(evaluate(order, x, t, y, s, log_weight));
}

double KernelEvaluator::evaluate(int order, const Point& x, double t, const Point& y, double s, double shift) const {
  const double dt = t - s;
  auto pick = [order](const Jet1& j) { return order == 0 ? j.value : order == 1 ? j.d1 : j.d2; };
  switch (geom_.kind()) {
    case BaseKind::Circle: {
      const double dth = x[0] - y[0];
      if (evolving_) {
        // Unit-circle kernel in conformal time; one 1/R(t) per x-derivative.
        const double dtau = clock(t) - clock(s);
        const double g = pick(circle_kernel(dth, dtau, 1.0, switch_threshold_, max_terms_, shift)) /
                         (evolving_->radius(s) * std::pow(evolving_->radius(t), order));
        return has_potential() ? std::exp(dtau) * g : g;
      }
      const double R = geom_.scale();
      const double g = pick(circle_kernel(R * dth, dt, R, switch_threshold_, max_terms_, shift));
      return has_potential() ? std::exp(geom_.a_squared() * dt) * g : g;
    }
    case BaseKind::PeriodicLine:
      return pick(circle_kernel(x[0] - y[0], dt, geom_.scale() / (2.0 * kPi), switch_threshold_, max_terms_, shift));
    case BaseKind::PeriodicPlane: {
      const double P = geom_.scale(), rho = P / (2.0 * kPi);
      const double dx = std::remainder(x[0] - y[0], P), dy = std::remainder(x[1] - y[1], P);
      const double d2 = dx * dx + dy * dy;
      // Split the weight between the factors in proportion to dx^2 : dy^2.
      const double sx = d2 > 0.0 ? shift * dx * dx / d2 : 0.0, sy = d2 > 0.0 ? shift * dy * dy / d2 : shift;
      const Jet1 a = circle_kernel(dx, dt, rho, switch_threshold_, max_terms_, sx);
      const Jet1 b = circle_kernel(dy, dt, rho, switch_threshold_, max_terms_, sy);
      if (order == 0) return a.value * b.value;
      if (order == 1) return std::hypot(a.d1 * b.value, a.value * b.d1);
      const double h11 = a.d2 * b.value, h12 = a.d1 * b.d1, h22 = a.value * b.d2;
      return std::sqrt(h11 * h11 + 2.0 * h12 * h12 + h22 * h22);
    }
    case BaseKind::Sphere: {
      const double gamma = angle_between(x, y);
      double scale, tau, factor;
      if (evolving_) {
        const double Rs = evolving_->radius(s), Rt = evolving_->radius(t);
        tau = clock(t) - clock(s);
        scale = 1.0 / (Rs * Rs * std::pow(Rt, order));
        factor = has_potential() ? std::exp(2.0 * tau) : 1.0;
      } else {
        const double R = geom_.scale();
        tau = dt / (R * R);
        scale = 1.0 / std::pow(R, 2 + order);
        factor = has_potential() ? std::exp(geom_.a_squared() * dt) : 1.0;
      }
      const SphereJet j = sphere_kernel(gamma, tau, max_terms_);
      const double w = factor * scale * std::exp(shift);
      if (order == 0) return w * j.value;
      if (order == 1) return w * std::abs(j.d1);
      return w * std::hypot(j.d2, j.tangential);
    }
  }
  return 0.0;
}

double KernelEvaluator::mass(const Point& x, double t, double s) const {
  check_times(t, s);
  const double unit = evolving_ ? clock(t) - clock(s)
                                : (t - s) / std::pow(geom_.is_round() ? geom_.scale() : geom_.scale() / (2 * kPi), 2);
  // Enough nodes that the periodic trapezoid rule (or Gauss rule on the
  // sphere) resolves the kernel to round-off.
  const int need = static_cast<int>(std::ceil(std::sqrt(60.0 / unit))) + 8;
  const double Rs = evolving_ ? evolving_->radius(s) : geom_.scale();
  switch (geom_.kind()) {
    case BaseKind::Circle:
    case BaseKind::PeriodicLine: {
      const int M = std::max(geom_.grid_size(), 2 * need);
      const double span = geom_.kind() == BaseKind::Circle ? 2.0 * kPi : geom_.scale();
      const double w = geom_.kind() == BaseKind::Circle ? Rs * span / M : span / M;
      double sum = 0.0;
      for (int k = 0; k < M; ++k) sum += w * eval(x, t, {x[0] + span * k / M, 0.0}, s);
      return sum;
    }
    case BaseKind::PeriodicPlane: {
      const int M = std::max(geom_.grid_size(), 2 * need);
      const double P = geom_.scale();
      double sum = 0.0;
      for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) sum += eval(x, t, {x[0] + P * a / M, x[1] + P * b / M}, s);
      return sum * (P / M) * (P / M);
    }
    case BaseKind::Sphere: {
      // Isotropy: integrate over the geodesic angle about the north pole.
      const auto rule = gauss_legendre(static_cast<std::size_t>(std::max(64, 2 * need)));
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * eval({0.0, 0.0}, t, {std::acos(rule.nodes[i]), 0.0}, s);
      return 2.0 * kPi * Rs * Rs * sum;
    }
  }
  return 0.0;
}

namespace {

struct SampleMax {
  double main = 0.0, reference = 0.0, extended = 0.0;
  std::size_t count = 0;
};

// Offsets y from x = origin (or the north pole) at distance d in the base metric.
std::vector<Point> targets(const BaseGeometry& geom, double d) {
  switch (geom.kind()) {
    case BaseKind::Circle:
      return {{d / geom.scale(), 0.0}};
    case BaseKind::PeriodicLine:
      return {{d, 0.0}};
    case BaseKind::PeriodicPlane:
      return {{d, 0.0}, {d / std::sqrt(2.0), d / std::sqrt(2.0)}};
    case BaseKind::Sphere:
      return {{d / geom.scale(), 0.0}};
  }
  return {};
}

double largest_distance(const BaseGeometry& geom) {
  switch (geom.kind()) {
    case BaseKind::Circle:
    case BaseKind::Sphere:
      return kPi * geom.scale();
    case BaseKind::PeriodicLine:
      return 0.5 * geom.scale();
    case BaseKind::PeriodicPlane:
      return 0.5 * std::sqrt(2.0) * geom.scale();
  }
  return 0.0;
}

}  // namespace

GaussianBoundCertificate certify_gaussian_bound(const KernelEvaluator& ev, int order, double D,
                                                const BoundSamples& samples) {
  if (order < 0 || order > 2) throw std::invalid_argument("certify_gaussian_bound: order must be 0, 1 or 2");
  if (order > ev.max_order())
    throw UnsupportedError("certify_gaussian_bound: no order-" + std::to_string(order) + " bound for " +
                           to_string(ev.kind()));
  if (!(D > 0.0)) throw std::invalid_argument("certify_gaussian_bound: D must be positive");
  if (!(samples.t_min > 0.0) || !(samples.t_max > samples.t_min) || samples.time_samples < 2 ||
      samples.distance_samples < 2 || !(samples.extension > 1.0))
    throw std::invalid_argument("certify_gaussian_bound: invalid sample specification");
  if (ev.evolving() && samples.t_max >= ev.evolving()->extinction_time())
    throw DomainError("certify_gaussian_bound: t_max reaches extinction of the base flow");

  const BaseGeometry& geom = ev.geometry();
  const int n = geom.dimension();
  const bool sphere = geom.kind() == BaseKind::Sphere;
  const Point origin{0.0, 0.0};
  const double dmax0 = largest_distance(geom);

  struct TimeSample {
    double t;
    int band;  // 0 main, 1 extension
  };
  std::vector<TimeSample> times;
  for (int k = 0; k < samples.time_samples; ++k)
    times.push_back({samples.t_min * std::pow(samples.t_max / samples.t_min, k / (samples.time_samples - 1.0)), 0});
  const int ext = std::max(4, samples.time_samples / 6);
  for (int k = 0; k < ext; ++k)
    times.push_back({samples.t_min / samples.extension * std::pow(samples.extension, k / static_cast<double>(ext)), 1});

  // On the sphere the Legendre series loses relative accuracy where the
  // Gaussian factor is tiny; those samples are left out.
  auto resolved = [&](double d, double gap) { return !sphere || std::exp(-d * d / (4.0 * gap)) >= 1e-10; };

  struct Local {
    double bound = 0.0, off = 0.0;
    std::size_t count = 0;
  };
  std::vector<Local> local(times.size());
  detail::parallel_for(times.size(), [&](std::size_t i) {
    const double t = times[i].t;
    Local& out = local[i];
    for (int m = 0; m < samples.distance_samples; ++m) {
      const double d0 = dmax0 * m / (samples.distance_samples - 1.0);
      for (const Point& y : targets(geom, d0)) {
        const double d = ev.distance(origin, y, t);
        // Main bound with s = 0.
        if (resolved(d, t)) {
          const double q =
              ev.weighted_magnitude(order, origin, t, y, 0.0, d * d / (4.0 * D * t)) * std::pow(t, 0.5 * (n + order));
          out.bound = std::max(out.bound, q);
          ++out.count;
        }
        // Off-diagonal form over source times s outside Omega(x, t).
        for (int k = 0; k < 24; ++k) {
          const double s = k < 16 ? t * k / 16.0 : t * (1.0 - std::pow(0.5, k - 14));
          if (d < std::sqrt(t) && s >= 0.5 * t) continue;
          if (!resolved(d, t - s)) continue;
          double sum = 0.0;
          for (int j = 0; j <= ev.max_order(); ++j)
            sum += std::pow(t, 0.5 * j) * ev.weighted_magnitude(j, origin, t, y, s, d * d / (4.0 * D * t));
          out.off = std::max(out.off, sum * std::pow(t, 0.5 * n));
        }
      }
    }
  });

  GaussianBoundCertificate cert;
  cert.kind = ev.kind();
  cert.order = order;
  cert.D = D;
  cert.t_min = samples.t_min;
  cert.t_max = samples.t_max;
  for (std::size_t i = 0; i < times.size(); ++i) {
    cert.samples += local[i].count;
    if (times[i].band == 1) {
      cert.C_extended = std::max(cert.C_extended, local[i].bound);
      cert.off_diagonal_extended = std::max(cert.off_diagonal_extended, local[i].off);
      continue;
    }
    cert.C = std::max(cert.C, local[i].bound);
    cert.off_diagonal_C = std::max(cert.off_diagonal_C, local[i].off);
    if (times[i].t <= 10.0 * samples.t_min * (1.0 + 1e-12)) {
      cert.C_reference = std::max(cert.C_reference, local[i].bound);
      cert.off_diagonal_reference = std::max(cert.off_diagonal_reference, local[i].off);
    }
  }
  const double m1 = 1.0 - cert.C_extended / (1.05 * cert.C_reference);
  const double m2 = 1.0 - cert.off_diagonal_extended / (1.05 * cert.off_diagonal_reference);
  cert.margin = std::min(m1, m2);
  cert.pass = std::isfinite(cert.C) && cert.C > 0.0 && cert.margin >= 0.0;
  return cert;
}

}  // namespace mcf
