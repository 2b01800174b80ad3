#include "mcf/parabolic_norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "mcf/errors.hpp"
#include "parallel.hpp"

namespace mcf {

namespace {

constexpr double kPi = std::numbers::pi;

// Integrals of a sampled density over intrinsic balls of one time slice.
// 1-D: exact integral of the periodic piecewise-linear interpolant.
// 2-D: quadrature-weighted mean over grid points in the ball times the exact
// ball area (the raw weighted sum once the ball wraps around a torus).
class BallIntegrator {
 public:
  BallIntegrator(const BaseGeometry& geom, double max_coordinate_radius) : geom_(geom) {
    if (geom.dimension() == 1) return;
    const std::size_t np = geom.point_count();
    neighbours_.resize(np);
    const bool sphere = geom.kind() == BaseKind::Sphere;
    std::vector<std::array<double, 3>> unit;
    if (sphere) {
      unit.resize(np);
      for (std::size_t i = 0; i < np; ++i) {
        const Point p = geom.point(i);
        unit[i] = {std::sin(p[0]) * std::cos(p[1]), std::sin(p[0]) * std::sin(p[1]), std::cos(p[0])};
      }
    }
    const double P = geom.scale();
    detail::parallel_for(np, [&](std::size_t c) {
      auto& list = neighbours_[c];
      for (std::size_t q = 0; q < np; ++q) {
        double d;
        if (sphere) {
          const auto& a = unit[c];
          const auto& b = unit[q];
          d = std::acos(std::clamp(a[0] * b[0] + a[1] * b[1] + a[2] * b[2], -1.0, 1.0));
        } else {
          const Point x = geom.point(c), y = geom.point(q);
          auto wrap = [P](double v) {
            v = std::fmod(std::abs(v), P);
            return std::min(v, P - v);
          };
          d = std::hypot(wrap(x[0] - y[0]), wrap(x[1] - y[1]));
        }
        if (d <= max_coordinate_radius) list.emplace_back(d, q);
      }
      std::sort(list.begin(), list.end());
    });
  }

  /// Cumulative integrals for the 1-D interpolant, one entry per node plus the total.
  std::vector<double> prepare(const std::vector<double>& density) const {
    if (geom_.dimension() != 1) return {};
    const std::size_t N = density.size();
    const double h = cell();
    std::vector<double> cum(N + 1, 0.0);
    for (std::size_t i = 0; i < N; ++i) cum[i + 1] = cum[i] + 0.5 * h * (density[i] + density[(i + 1) % N]);
    return cum;
  }

  double integrate(const std::vector<double>& density, const std::vector<double>& cum, std::size_t c, double r,
                   double rho) const {
    const bool round = geom_.is_round();
    if (geom_.dimension() == 1) {
      const double period = round ? 2.0 * kPi : geom_.scale();
      const double factor = round ? rho : 1.0;
      const double half = round ? r / rho : r;
      if (2.0 * half >= period) return factor * cum.back();
      const double x = geom_.point(c)[0];
      return factor * (antiderivative(density, cum, x + half) - antiderivative(density, cum, x - half));
    }
    const double alpha = geom_.kind() == BaseKind::Sphere ? r / rho : r;
    const auto w = geom_.weights();
    double sw = 0.0, swf = 0.0;
    for (const auto& [d, q] : neighbours_[c]) {
      if (d >= alpha) break;
      sw += w[q];
      swf += w[q] * density[q];
    }
    if (geom_.kind() == BaseKind::Sphere) {
      // Weights carry R0^2; rescale to the slice radius.
      const double area = alpha < kPi ? 2.0 * kPi * rho * rho * (1.0 - std::cos(alpha)) : 4.0 * kPi * rho * rho;
      return sw > 0.0 ? swf / sw * area : 0.0;
    }
    if (r < 0.5 * geom_.scale()) return sw > 0.0 ? swf / sw * kPi * r * r : 0.0;
    return swf;
  }

 private:
  double cell() const { return (geom_.is_round() ? 2.0 * kPi : geom_.scale()) / geom_.grid_size(); }

  double antiderivative(const std::vector<double>& f, const std::vector<double>& cum, double x) const {
    const double h = cell();
    const long N = static_cast<long>(f.size());
    const double s = x / h;
    const long k = static_cast<long>(std::floor(s));
    const double xi = s - static_cast<double>(k);
    long q = k / N;
    long i = k - q * N;
    if (i < 0) {
      i += N;
      q -= 1;
    }
    const double fi = f[i], fj = f[(i + 1) % N];
    return static_cast<double>(q) * cum.back() + cum[i] + h * (fi * xi + 0.5 * (fj - fi) * xi * xi);
  }

  BaseGeometry geom_;
  std::vector<std::vector<std::pair<double, std::size_t>>> neighbours_;
};

struct Slices {
  std::vector<double> times;
  std::vector<double> rho;
  std::vector<std::vector<double>> density;
};

struct Term {
  double value = 0.0;
  std::size_t argmax_x = 0;
  double argmax_r = 0.0;
  std::vector<std::optional<double>> per_radius;  // empty when the radius is unresolved
};

std::vector<std::size_t> window_nodes(const std::vector<std::size_t>& nodes, const std::vector<double>& t, double a,
                                      double b, double eps) {
  std::vector<std::size_t> in;
  for (auto j : nodes)
    if (t[j] >= a - eps && t[j] <= b + eps) in.push_back(j);
  return in;
}

Term cylinder_term(const BaseGeometry& geom, const BallIntegrator& balls, const Slices& s,
                   const std::vector<std::vector<double>>& cums, const std::vector<double>& ladder, std::size_t stride,
                   bool strict, double T) {
  const int n = geom.dimension();
  const double p = n + 4.0;
  const double eps = 1e-12 * T;
  std::vector<std::size_t> nodes;
  for (std::size_t j = 0; j < s.times.size(); j += stride) nodes.push_back(j);

  std::vector<bool> resolved(ladder.size(), false);
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const double r = ladder[k];
    const double a = 0.5 * r * r, b = r * r;
    const bool covered = s.times[nodes.back()] >= b - eps;
    resolved[k] = covered && window_nodes(nodes, s.times, a, b, eps).size() >= 3;
    if (strict && !resolved[k]) {
      std::ostringstream msg;
      msg << "time grid too coarse: cylinder of radius " << r << " spans fewer than two time steps";
      throw DomainError(msg.str());
    }
  }

  const std::size_t np = geom.point_count();
  std::vector<std::vector<double>> best(np, std::vector<double>(ladder.size(), 0.0));
  detail::parallel_for(np, [&](std::size_t c) {
    for (std::size_t k = 0; k < ladder.size(); ++k) {
      if (!resolved[k]) continue;
      const double r = ladder[k];
      const double a = 0.5 * r * r, b = r * r;
      double integral = 0.0;
      for (std::size_t m = 0; m + 1 < nodes.size(); ++m) {
        const std::size_t j0 = nodes[m], j1 = nodes[m + 1];
        const double t0 = s.times[j0], t1 = s.times[j1];
        if (t1 <= a || t0 >= b) continue;
        const double lo = std::max(t0, a), hi = std::min(t1, b);
        if (hi <= lo) continue;
        const double S0 = balls.integrate(s.density[j0], cums[j0], c, r, s.rho[j0]);
        const double S1 = balls.integrate(s.density[j1], cums[j1], c, r, s.rho[j1]);
        auto at = [&](double t) { return S0 + (S1 - S0) * (t - t0) / (t1 - t0); };
        integral += 0.5 * (hi - lo) * (at(lo) + at(hi));
      }
      best[c][k] = std::pow(r, 2.0 / p) * std::pow(std::max(integral, 0.0), 1.0 / p);
    }
  });

  Term term;
  term.per_radius.assign(ladder.size(), std::nullopt);
  for (std::size_t k = 0; k < ladder.size(); ++k)
    if (resolved[k]) term.per_radius[k] = 0.0;
  for (std::size_t c = 0; c < np; ++c)
    for (std::size_t k = 0; k < ladder.size(); ++k) {
      if (!resolved[k]) continue;
      term.per_radius[k] = std::max(*term.per_radius[k], best[c][k]);
      if (best[c][k] > term.value) {
        term.value = best[c][k];
        term.argmax_x = c;
        term.argmax_r = ladder[k];
      }
    }
  return term;
}

struct Prepared {
  Slices slices;
  double sup_u = 0.0;
  double sup_grad = 0.0;
};

// Collects the slices with t <= T and their densities |f|^{n+4}.
Prepared prepare(const SpaceTimeField& f, double T, bool hessian, const NormOptions& options) {
  if (!(T > 0.0)) throw DomainError("norm: horizon must be positive");
  const auto times = f.times();
  if (times.back() < T * (1.0 - 1e-12)) throw DomainError("norm: field does not cover [0, T]");
  const BaseGeometry& geom = f.geometry();
  const double p = geom.dimension() + 4.0;
  Prepared out;
  std::size_t count = 0;
  while (count < times.size() && times[count] <= T * (1.0 + 1e-12)) ++count;
  out.slices.times.assign(times.begin(), times.begin() + static_cast<long>(count));
  out.slices.rho.resize(count);
  out.slices.density.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double rho = options.fixed_metric ? geom.scale() : f.base_radius(j);
    out.slices.rho[j] = rho;
    const auto v = f.slice(j);
    auto& d = out.slices.density[j];
    d.resize(v.size());
    if (hessian) {
      const FieldJet jt = geom.jet(v, rho);
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.sup_u = std::max(out.sup_u, std::abs(v[i]));
        out.sup_grad = std::max(out.sup_grad, jt.grad_norm(i));
        d[i] = std::pow(jt.hess_norm(i), p);
      }
    } else {
      for (std::size_t i = 0; i < v.size(); ++i) d[i] = std::pow(std::abs(v[i]), p);
    }
  }
  return out;
}

NormReport assemble(const SpaceTimeField& f, double T, bool hessian, const NormOptions& options) {
  const BaseGeometry& geom = f.geometry();
  Prepared prep = prepare(f, T, hessian, options);
  const auto ladder = dyadic_ladder(geom, T);
  double rho_min = geom.scale();
  for (double r : prep.slices.rho) rho_min = std::min(rho_min, r);
  const double reach = geom.is_round() ? ladder.front() / rho_min : ladder.front();
  const BallIntegrator balls(geom, reach);
  std::vector<std::vector<double>> cums;
  for (const auto& d : prep.slices.density) cums.push_back(balls.prepare(d));

  const Term fine = cylinder_term(geom, balls, prep.slices, cums, ladder, 1, true, T);
  NormReport rep;
  rep.sup_u = prep.sup_u;
  rep.sup_grad = prep.sup_grad;
  rep.hessian_term = fine.value;
  rep.argmax_x = fine.argmax_x;
  rep.argmax_r = fine.argmax_r;
  rep.ladder_size = ladder.size();
  rep.value = rep.sup_u + rep.sup_grad + rep.hessian_term;
  if (options.refinement_check && fine.value > 0.0) {
    const Term coarse = cylinder_term(geom, balls, prep.slices, cums, ladder, 2, false, T);
    bool any = false;
    double worst = 0.0;
    for (std::size_t k = 0; k < ladder.size(); ++k) {
      if (!coarse.per_radius[k]) continue;
      any = true;
      worst = std::max(worst, std::abs(*coarse.per_radius[k] - *fine.per_radius[k]));
    }
    rep.refinement_stable = any && worst <= 0.02 * fine.value;
  }
  return rep;
}

}  // namespace

std::vector<double> dyadic_ladder(const BaseGeometry& geom, double T) {
  if (!(T > 0.0)) throw DomainError("dyadic_ladder: horizon must be positive");
  const double h = geom.grid_spacing();
  std::vector<double> ladder{std::sqrt(T)};
  for (int j = 1; j < 64; ++j) {
    const double r = std::sqrt(T) * std::pow(2.0, -0.5 * j);
    if (r < h) break;
    ladder.push_back(r);
  }
  return ladder;
}

NormReport xt_norm(const SpaceTimeField& u, double T, const NormOptions& options) {
  return assemble(u, T, true, options);
}

NormReport yt_norm(const SpaceTimeField& q, double T, const NormOptions& options) {
  return assemble(q, T, false, options);
}

double c01_norm(const GraphFunction& f) {
  const FieldJet j = f.geometry().jet(f.values(), f.base_radius());
  double sup = 0.0, grad = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sup = std::max(sup, std::abs(f[i]));
    grad = std::max(grad, j.grad_norm(i));
  }
  return sup + grad;
}

}  // namespace mcf
