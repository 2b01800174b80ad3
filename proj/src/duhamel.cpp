#include "mcf/duhamel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mcf/errors.hpp"
#include "mcf/quadrature.hpp"
#include "parallel.hpp"

namespace mcf {

namespace {

constexpr double kPi = std::numbers::pi;

// First stencil node of the cubic through the four nodes nearest [t_i, t_{i+1}].
std::size_t stencil_start(std::size_t i, std::size_t last, std::size_t width) {
  if (last + 1 <= width) return 0;
  const std::size_t a = i == 0 ? 0 : i - 1;
  return std::min(a, last + 1 - width);
}

double lagrange(std::span<const double> nodes, std::size_t m, double s) {
  double v = 1.0;
  for (std::size_t q = 0; q < nodes.size(); ++q)
    if (q != m) v *= (s - nodes[q]) / (nodes[m] - nodes[q]);
  return v;
}

struct Interval {
  std::size_t start = 0;   // first stencil node
  std::size_t width = 0;   // stencil size
};

struct RateTable {
  std::vector<double> decay;                    // exp(mu dPhi_i)
  std::vector<std::array<double, 4>> weights;   // per interval, per stencil node
};

bool same_grid(const BaseGeometry& a, const BaseGeometry& b) {
  return a.kind() == b.kind() && a.grid_size() == b.grid_size() && a.scale() == b.scale();
}

}  // namespace

DuhamelOperator::DuhamelOperator(KernelEvaluator kernel, int nodes_per_panel)
    : kernel_(std::move(kernel)), nodes_per_panel_(nodes_per_panel) {
  if (nodes_per_panel_ < 2) throw std::invalid_argument("DuhamelOperator: need at least 2 nodes per panel");
}

void DuhamelOperator::check_grid(const BaseGeometry& geom) const {
  if (!same_grid(geom, kernel_.geometry()))
    throw std::invalid_argument("DuhamelOperator: field and kernel live on different grids");
}

GraphFunction DuhamelOperator::propagate_initial(const GraphFunction& f0, double t) const {
  check_grid(f0.geometry());
  if (t < 0.0) throw DomainError("propagate_initial: t must be nonnegative");
  const auto& ev = kernel_.evolving();
  if (ev && t >= ev->extinction_time()) throw DomainError("propagate_initial: t at or past extinction");
  const BaseGeometry& geom = f0.geometry();
  auto c = geom.analyze(f0.values());
  const double dphi = kernel_.clock(t) - kernel_.clock(0.0);
  for (std::size_t j = 0; j < c.size(); ++j) c[j] *= std::exp(kernel_.rate(j) * dphi);
  if (ev) return GraphFunction(geom, geom.synthesize(c), ev->radius(t), t);
  return GraphFunction(geom, geom.synthesize(c), f0.base_radius(), t);
}

SpaceTimeField DuhamelOperator::propagate_initial(const GraphFunction& f0, const SpaceTimeField& grid) const {
  check_grid(grid.geometry());
  SpaceTimeField out = grid.zeros_like();
  for (std::size_t i = 0; i < out.time_count(); ++i) {
    const auto g = propagate_initial(f0, out.times()[i]);
    std::copy(g.values().begin(), g.values().end(), out.slice(i).begin());
  }
  return out;
}

SpaceTimeField DuhamelOperator::convolve(const SpaceTimeField& F) const {
  check_grid(F.geometry());
  const auto& ev = kernel_.evolving();
  if (ev && F.horizon() >= ev->extinction_time()) throw DomainError("convolve: field reaches extinction");
  const BaseGeometry& geom = F.geometry();
  const auto times = F.times();
  const std::size_t J = times.size() - 1;
  const std::size_t width = std::min<std::size_t>(4, J + 1);
  const std::size_t ncoef = geom.coefficient_count();

  std::vector<double> phi(times.size());
  for (std::size_t i = 0; i <= J; ++i) phi[i] = kernel_.clock(times[i]);
  std::vector<Interval> intervals(J);
  for (std::size_t i = 0; i < J; ++i) intervals[i] = {stencil_start(i, J, width), width};

  // One table per distinct rate.
  std::map<double, std::size_t> rate_index;
  std::vector<double> rates;
  std::vector<std::size_t> coef_rate(ncoef);
  for (std::size_t j = 0; j < ncoef; ++j) {
    const double mu = kernel_.rate(j);
    auto [it, inserted] = rate_index.try_emplace(mu, rates.size());
    if (inserted) rates.push_back(mu);
    coef_rate[j] = it->second;
  }
  const GaussRule rule = gauss_legendre(static_cast<std::size_t>(nodes_per_panel_));
  std::vector<RateTable> tables(rates.size());
  detail::parallel_for(rates.size(), [&](std::size_t r) {
    const double mu = rates[r];
    RateTable& tab = tables[r];
    tab.decay.resize(J);
    tab.weights.assign(J, {0.0, 0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < J; ++i) {
      const double dphi = phi[i + 1] - phi[i];
      tab.decay[i] = std::exp(mu * dphi);
      const auto nodes = times.subspan(intervals[i].start, intervals[i].width);
      // Keep |mu| * dPhi per sub-panel at most one.
      const auto panels = static_cast<std::size_t>(std::clamp(std::ceil(std::abs(mu) * dphi), 1.0, 1e5));
      const double a = times[i], h = (times[i + 1] - times[i]) / static_cast<double>(panels);
      for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double s = lo + 0.5 * h * (rule.nodes[q] + 1.0);
          const double w = 0.5 * h * rule.weights[q] * std::exp(mu * (phi[i + 1] - kernel_.clock(s)));
          for (std::size_t m = 0; m < nodes.size(); ++m) tab.weights[i][m] += w * lagrange(nodes, m, s);
        }
      }
    }
  });

  std::vector<std::vector<double>> src(J + 1);
  detail::parallel_for(J + 1, [&](std::size_t i) { src[i] = geom.analyze(F.slice(i)); });
  std::vector<std::vector<double>> out(J + 1, std::vector<double>(ncoef, 0.0));
  for (std::size_t j = 0; j < ncoef; ++j) {
    const RateTable& tab = tables[coef_rate[j]];
    double g = 0.0;
    for (std::size_t i = 0; i < J; ++i) {
      double inc = 0.0;
      for (std::size_t m = 0; m < intervals[i].width; ++m) inc += tab.weights[i][m] * src[intervals[i].start + m][j];
      g = tab.decay[i] * g + inc;
      out[i + 1][j] = g;
    }
  }
  SpaceTimeField result = F.zeros_like();
  detail::parallel_for(J, [&](std::size_t i) {
    const auto v = geom.synthesize(out[i + 1]);
    std::copy(v.begin(), v.end(), result.slice(i + 1).begin());
  });
  return result;
}

PhysicalCheck duhamel_physical_check(const DuhamelOperator& op, const SpaceTimeField& F,
                                     const std::vector<std::size_t>& points, double band) {
  const KernelEvaluator& kernel = op.kernel();
  const BaseGeometry& geom = F.geometry();
  if (geom.dimension() != 1) throw UnsupportedError("duhamel_physical_check: only 1-D bases are supported");
  for (std::size_t p : points)
    if (p >= geom.point_count()) throw std::invalid_argument("duhamel_physical_check: point index out of range");

  PhysicalCheck out;
  out.points = points;
  const double t = F.horizon();
  const auto spectral = op.convolve(F);
  for (std::size_t p : points) out.spectral.push_back(spectral.slice(F.time_count() - 1)[p]);

  // Resample every slice fine enough that the kernel is resolved on the grid
  // down to the delta band.
  const int M = std::max(2048, geom.grid_size());
  const bool circle = geom.kind() == BaseKind::Circle;
  const double span = circle ? 2.0 * kPi : geom.scale();
  const double spacing = circle ? geom.scale() * span / M : span / M;
  if (band <= 0.0) band = spacing * spacing;
  std::vector<std::vector<double>> fine(F.time_count());
  for (std::size_t i = 0; i < F.time_count(); ++i) fine[i] = geom.resample(F.slice(i), M);

  const auto times = F.times();
  const std::size_t J = times.size() - 1;
  auto source_at = [&](std::size_t m, double s) {
    // Nodal cubic Lagrange interpolation in time.
    const auto hi = std::upper_bound(times.begin(), times.end(), s);
    std::size_t i = hi == times.begin() ? 0 : static_cast<std::size_t>(hi - times.begin()) - 1;
    i = std::min(i, J - 1);
    const std::size_t width = std::min<std::size_t>(4, J + 1);
    const std::size_t a = stencil_start(i, J, width);
    const auto nodes = times.subspan(a, width);
    double v = 0.0;
    for (std::size_t q = 0; q < width; ++q) v += lagrange(nodes, q, s) * fine[a + q][m];
    return v;
  };
  auto measure = [&](double s) {
    if (!circle) return span / M;
    return (kernel.evolving() ? kernel.evolving()->radius(s) : geom.scale()) * span / M;
  };

  // Geometric panels in sigma = t - s from the band up to t.
  const GaussRule rule = gauss_legendre(10);
  const int panels = 40;
  out.physical.assign(points.size(), 0.0);
  detail::parallel_for(points.size(), [&](std::size_t k) {
    const Point x = geom.point(points[k]);
    const double xf = x[0];
    std::size_t m0 = static_cast<std::size_t>(std::llround(xf / span * M)) % static_cast<std::size_t>(M);
    double total = 0.0;
    const double lo = std::min(band, t);
    for (int p = 0; p < panels; ++p) {
      const double a = lo * std::pow(t / lo, static_cast<double>(p) / panels);
      const double b = lo * std::pow(t / lo, static_cast<double>(p + 1) / panels);
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double sigma = a + 0.5 * (b - a) * (rule.nodes[q] + 1.0);
        const double s = t - sigma;
        double inner = 0.0;
        for (int m = 0; m < M; ++m) {
          const Point y{span * m / M, 0.0};
          inner += kernel.eval(x, t, y, s) * source_at(static_cast<std::size_t>(m), s);
        }
        total += 0.5 * (b - a) * rule.weights[q] * inner * measure(s);
      }
    }
    // Near-diagonal band: kernel ~ mass(t, s) * delta_x.
    if (lo < t) {
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double sigma = 0.5 * lo * (rule.nodes[q] + 1.0);
        const double s = t - sigma;
        const double mass = kernel.has_potential() ? std::exp(kernel.rate(0) * (kernel.clock(t) - kernel.clock(s))) : 1.0;
        total += 0.5 * lo * rule.weights[q] * mass * source_at(m0, s);
      }
    }
    out.physical[k] = total;
  });

  double scale = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    out.max_abs = std::max(out.max_abs, std::abs(out.spectral[k] - out.physical[k]));
    scale = std::max(scale, std::abs(out.spectral[k]));
  }
  out.max_rel = out.max_abs / (scale > 0.0 ? scale : 1.0);
  return out;
}

SpaceTimeField random_probe_field(const BaseGeometry& geom, const std::optional<EvolvingGeometry>& evolving,
                                  const ProbeOptions& options, std::uint64_t seed) {
  if (options.time_steps < 1 || !(options.horizon > 0.0) || options.time_degree < 0)
    throw std::invalid_argument("random_probe_field: invalid options");
  const int band = options.bandlimit > 0 ? options.bandlimit : geom.grid_size() / 4;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> profiles;
  for (int d = 0; d <= options.time_degree; ++d) {
    std::vector<double> c(geom.coefficient_count(), 0.0);
    for (std::size_t j = 0; j < c.size(); ++j)
      if (geom.degree(j) <= band) c[j] = normal(rng);
    profiles.push_back(geom.synthesize(c));
  }
  SpaceTimeField q(geom, uniform_times(options.horizon, options.time_steps), evolving);
  for (std::size_t i = 0; i < q.time_count(); ++i) {
    const double s = q.times()[i] / options.horizon;
    auto slice = q.slice(i);
    double power = 1.0;
    for (const auto& prof : profiles) {
      for (std::size_t p = 0; p < slice.size(); ++p) slice[p] += power * prof[p];
      power *= s;
    }
  }
  return q;
}

ProbeReport operator_norm_probe(const DuhamelOperator& op, std::size_t count, std::uint64_t seed,
                                const ProbeOptions& options) {
  if (count < 1) throw std::invalid_argument("operator_norm_probe: count must be at least 1");
  const KernelEvaluator& kernel = op.kernel();
  ProbeReport report;
  report.seed = seed;
  report.samples = count;
  report.ratios.assign(count, 0.0);
  const double T = options.horizon;
  detail::parallel_for(count, [&](std::size_t k) {
    SpaceTimeField q(kernel.geometry(), uniform_times(T, options.time_steps), kernel.evolving());
    if (k == 0) {
      for (double& v : q.data()) v = 1.0;
    } else {
      q = random_probe_field(kernel.geometry(), kernel.evolving(), options, seed + k);
    }
    const double y = yt_norm(q, T, options.norms).value;
    const double x = xt_norm(op.convolve(q), T, options.norms).value;
    report.ratios[k] = x / y;
  });
  for (double r : report.ratios) report.C_fit = std::max(report.C_fit, r);
  return report;
}

}  // namespace mcf
