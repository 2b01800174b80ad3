#include "mcf/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mcf/errors.hpp"
#include "mcf/graph_calculus.hpp"
#include "mcf/parabolic_norms.hpp"
#include "parallel.hpp"

namespace mcf {

namespace {

const NormOptions kFast{.refinement_check = false};

double xnorm(const SpaceTimeField& u) { return xt_norm(u, u.horizon(), kFast).value; }
double ynorm(const SpaceTimeField& q) { return yt_norm(q, q.horizon(), kFast).value; }

int default_bandlimit(const BaseGeometry& geom, int requested) {
  return requested > 0 ? requested : std::max(2, geom.grid_size() / 8);
}

// -H0 + Q(u) slice by slice over a fixed base.
SpaceTimeField existence_source(const SpaceTimeField& u) {
  SpaceTimeField F = u.zeros_like();
  const double H0 = u.geometry().mean_curvature();
  for (std::size_t j = 0; j < u.time_count(); ++j) {
    const auto q = nonlinearity_Q(u.graph(j));
    auto out = F.slice(j);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -H0 + q[i];
  }
  return F;
}

SpaceTimeField quadratic_part(const SpaceTimeField& u) {
  SpaceTimeField F = u.zeros_like();
  const auto& ev = u.evolving();
  for (std::size_t j = 0; j < u.time_count(); ++j) {
    const auto q = ev ? nonlinearity_Q_t(u.graph(j), *ev, u.times()[j]) : nonlinearity_Q(u.graph(j));
    std::copy(q.begin(), q.end(), F.slice(j).begin());
  }
  return F;
}

struct Picard {
  std::function<SpaceTimeField(const SpaceTimeField&)> map;
  double delta;
  double tolerance;
  int max_iterations;
};

FlowSolution iterate(const Picard& p, SpaceTimeField u) {
  FlowSolution sol{u, {}, {}, 0.0, 0.0, false, 0};
  for (int m = 1; m <= p.max_iterations; ++m) {
    SpaceTimeField next = p.map(u);
    const double size = xnorm(next);
    const double d = xnorm(next - u);
    sol.distances.push_back(d);
    if (sol.distances.size() >= 2) sol.ratios.push_back(d / sol.distances[sol.distances.size() - 2]);
    sol.iterations = m;
    if (size > p.delta) {
      std::ostringstream msg;
      msg << "Picard iterate " << m << " left the ball: ||u||_X = " << size << " > delta = " << p.delta
          << " (the map does not send the delta-ball into itself; contraction hypothesis of the fixed-point theorem "
             "violated)";
      throw BallExitError(msg.str(), sol.distances);
    }
    u = std::move(next);
    if (d < p.tolerance) {
      sol.converged = true;
      break;
    }
  }
  if (!sol.converged) {
    std::ostringstream msg;
    msg << "Picard iteration did not reach tolerance " << p.tolerance << " in " << p.max_iterations
        << " iterations; last distance " << (sol.distances.empty() ? 0.0 : sol.distances.back());
    throw ConvergenceError(msg.str(), sol.distances);
  }
  sol.residual = xnorm(p.map(u) - u);
  sol.norm = xnorm(u);
  sol.u = std::move(u);
  return sol;
}

void check_config(const PicardConfig& c) {
  if (!(c.delta > 0.0)) throw std::invalid_argument("PicardConfig: delta must be positive");
  if (!(c.tolerance > 0.0)) throw std::invalid_argument("PicardConfig: tolerance must be positive");
  if (!(c.horizon > 0.0)) throw std::invalid_argument("PicardConfig: horizon must be positive");
  if (c.max_iterations < 1 || c.time_steps < 1) throw std::invalid_argument("PicardConfig: invalid iteration counts");
}

// Random field in the ball of radius `radius` with a general initial slice.
SpaceTimeField scaled_probe(const BaseGeometry& geom, const std::optional<EvolvingGeometry>& evolving, double T,
                            int J, int band, double radius, std::uint64_t seed) {
  ProbeOptions o{.horizon = T, .time_steps = J, .bandlimit = band};
  SpaceTimeField u = random_probe_field(geom, evolving, o, seed);
  const double x = xnorm(u);
  return (radius / x) * u;
}

double fit_quadratic_constant(const BaseGeometry& geom, const std::optional<EvolvingGeometry>& evolving, double T,
                              double radius, std::uint64_t seed, const FitOptions& options) {
  const int band = default_bandlimit(geom, options.bandlimit);
  std::vector<double> ratios(options.pair_probes, 0.0);
  detail::parallel_for(options.pair_probes, [&](std::size_t k) {
    std::mt19937_64 rng(seed + 7919 * k);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    const double a1 = unit(rng), a2 = unit(rng);
    const auto u1 = scaled_probe(geom, evolving, T, options.time_steps, band, a1 * radius, seed + 2 * k + 1);
    // Every third pair measures Q(u) against Q(0) = 0.
    const auto u2 = k % 3 == 0 ? u1.zeros_like()
                               : scaled_probe(geom, evolving, T, options.time_steps, band, a2 * radius, seed + 2 * k + 2);
    const double num = ynorm(quadratic_part(u1) - quadratic_part(u2));
    const double den = (xnorm(u1) + xnorm(u2)) * xnorm(u1 - u2);
    ratios[k] = num / den;
  });
  return *std::max_element(ratios.begin(), ratios.end());
}

}  // namespace

ExistenceChoice choose_constants(const BaseGeometry& geom, const ExistenceConstants& c) {
  if (!(c.C1 > 0.0) || !(c.C2 > 0.0) || !(c.C3 > 0.0))
    throw std::invalid_argument("choose_constants: constants must be positive");
  ExistenceChoice out;
  out.delta = 1.0 / (4.0 * c.C1 * c.C2);
  const double H0 = std::abs(geom.mean_curvature());
  const double first = H0 > 0.0 ? 1.0 / (8.0 * c.C1 * c.C2 * c.C3 * H0) : INFINITY;
  out.sqrt_T = std::min(first, 0.5 * geom.injectivity_radius());
  out.horizon = out.sqrt_T * out.sqrt_T;
  return out;
}

PerturbationChoice choose_perturbation_constants(const PerturbationConstants& c, double delta_cap) {
  if (!(c.C4 > 0.0) || !(c.C5 > 0.0) || !(c.C6 > 0.0))
    throw std::invalid_argument("choose_perturbation_constants: constants must be positive");
  PerturbationChoice out;
  out.delta = 1.0 / (4.0 * c.C4 * c.C5);
  if (delta_cap > 0.0) out.delta = std::min(out.delta, delta_cap);
  out.epsilon = out.delta / c.C6;
  return out;
}

ExistenceFit fit_existence_constants(const BaseGeometry& geom, double initial_horizon, std::uint64_t seed,
                                     const FitOptions& options) {
  if (!(initial_horizon > 0.0)) throw std::invalid_argument("fit_existence_constants: horizon must be positive");
  DuhamelOperator D(KernelEvaluator::schrodinger(geom));
  ExistenceFit fit;
  fit.ball_radius = options.ball_fraction * geom.graph_validity_threshold();
  double T = initial_horizon;
  for (int round = 1; round <= options.max_rounds; ++round) {
    fit.rounds = round;
    const ProbeOptions po{.horizon = T, .time_steps = options.time_steps};
    fit.constants.C1 = operator_norm_probe(D, options.operator_probes, seed, po).C_fit;
    fit.constants.C2 = fit_quadratic_constant(geom, std::nullopt, T, fit.ball_radius, seed, options);
    SpaceTimeField one(geom, uniform_times(T, options.time_steps));
    for (double& v : one.data()) v = 1.0;
    fit.constants.C3 = xnorm(D.convolve(one)) / std::sqrt(T);
    fit.choice = choose_constants(geom, fit.constants);
    fit.fitted_horizon = T;
    if (fit.choice.horizon >= T * (1.0 - 1e-9)) break;
    T = fit.choice.horizon;
  }
  if (fit.choice.delta > fit.ball_radius) {
    fit.choice.delta = fit.ball_radius;
    fit.delta_capped = true;
  }
  return fit;
}

PerturbationFit fit_perturbation_constants(const EvolvingGeometry& evolving, double horizon, std::uint64_t seed,
                                           const FitOptions& options) {
  const BaseGeometry& geom = evolving.base();
  if (!(horizon > 0.0) || horizon >= evolving.extinction_time())
    throw DomainError("fit_perturbation_constants: horizon must lie before extinction");
  DuhamelOperator D(KernelEvaluator::evolving_schrodinger(evolving));
  PerturbationFit fit;
  // The validity threshold shrinks with R(t); fit on the ball valid at T.
  fit.ball_radius = options.ball_fraction * graph_validity_threshold(geom, evolving.radius(horizon));
  const ProbeOptions po{.horizon = horizon, .time_steps = options.time_steps};
  fit.constants.C4 = operator_norm_probe(D, options.operator_probes, seed, po).C_fit;
  fit.constants.C5 = fit_quadratic_constant(geom, evolving, horizon, fit.ball_radius, seed, options);

  const int band = default_bandlimit(geom, options.bandlimit);
  SpaceTimeField grid(geom, uniform_times(horizon, options.time_steps), evolving);
  std::vector<double> ratios(std::max<std::size_t>(1, options.initial_probes), 0.0);
  detail::parallel_for(ratios.size(), [&](std::size_t k) {
    std::vector<double> f0(geom.point_count(), 1.0);
    if (k > 0) {
      std::mt19937_64 rng(seed + 104729 * k);
      std::normal_distribution<double> normal;
      std::vector<double> c(geom.coefficient_count(), 0.0);
      for (std::size_t j = 0; j < c.size(); ++j)
        if (geom.degree(j) <= band) c[j] = normal(rng);
      f0 = geom.synthesize(c);
    }
    const GraphFunction g(geom, f0, evolving.initial_radius(), 0.0);
    ratios[k] = xnorm(D.propagate_initial(g, grid)) / c01_norm(g);
  });
  fit.constants.C6 = *std::max_element(ratios.begin(), ratios.end());
  const double uncapped = 1.0 / (4.0 * fit.constants.C4 * fit.constants.C5);
  fit.delta_capped = uncapped > fit.ball_radius;
  fit.choice = choose_perturbation_constants(fit.constants, fit.ball_radius);
  return fit;
}

FlowSolution solve_existence(const BaseGeometry& geom, const PicardConfig& config,
                             const std::optional<SpaceTimeField>& initial) {
  check_config(config);
  DuhamelOperator D(KernelEvaluator::schrodinger(geom));
  SpaceTimeField u0(geom, uniform_times(config.horizon, config.time_steps));
  if (initial) {
    if (initial->time_count() != u0.time_count() || initial->horizon() != config.horizon)
      throw std::invalid_argument("solve_existence: initial iterate has the wrong time grid");
    if (xnorm(*initial) > config.delta) throw PreconditionError("solve_existence: initial iterate outside the delta-ball");
    u0 = *initial;
  }
  Picard p{[&D](const SpaceTimeField& u) { return D.convolve(existence_source(u)); }, config.delta, config.tolerance,
           config.max_iterations};
  return iterate(p, std::move(u0));
}

FlowSolution solve_perturbation(const EvolvingGeometry& evolving, const GraphFunction& u0, const PicardConfig& config,
                                double epsilon) {
  check_config(config);
  if (config.horizon >= evolving.extinction_time())
    throw DomainError("solve_perturbation: horizon at or past extinction of the base flow");
  const double size = c01_norm(u0);
  if (epsilon > 0.0 && size > epsilon) {
    std::ostringstream msg;
    msg << "solve_perturbation: ||u0||_C01 = " << size << " exceeds epsilon = " << epsilon;
    throw PreconditionError(msg.str());
  }
  DuhamelOperator D(KernelEvaluator::evolving_schrodinger(evolving));
  SpaceTimeField grid(evolving.base(), uniform_times(config.horizon, config.time_steps), evolving);
  const SpaceTimeField free = D.propagate_initial(u0, grid);
  Picard p{[&D, &free](const SpaceTimeField& u) { return free + D.convolve(quadratic_part(u)); }, config.delta,
           config.tolerance, config.max_iterations};
  return iterate(p, free);
}

SpaceTimeField random_iterate(const BaseGeometry& geom, const std::optional<EvolvingGeometry>& evolving,
                              double horizon, int time_steps, int bandlimit, double radius, std::uint64_t seed) {
  ProbeOptions o{.horizon = horizon, .time_steps = time_steps, .bandlimit = default_bandlimit(geom, bandlimit)};
  SpaceTimeField w = random_probe_field(geom, evolving, o, seed);
  for (std::size_t j = 0; j < w.time_count(); ++j) {
    const double s = w.times()[j] / horizon;
    for (double& v : w.slice(j)) v *= s;
  }
  return (radius / xnorm(w)) * w;
}

ContractionReport measure_contraction(MapKind map, const BaseGeometry& geom,
                                      const std::optional<EvolvingGeometry>& evolving, double delta, double horizon,
                                      std::size_t pairs, std::uint64_t seed, const std::optional<GraphFunction>& u0,
                                      const FitOptions& options) {
  if (pairs < 1) throw std::invalid_argument("measure_contraction: need at least one pair");
  if (!(delta > 0.0)) throw std::invalid_argument("measure_contraction: delta must be positive");
  if (map == MapKind::Perturbation && !evolving)
    throw std::invalid_argument("measure_contraction: the perturbation map needs an evolving base");
  const std::optional<EvolvingGeometry> ev = map == MapKind::Perturbation ? evolving : std::nullopt;
  const KernelEvaluator kernel =
      ev ? KernelEvaluator::evolving_schrodinger(*ev) : KernelEvaluator::schrodinger(geom);
  DuhamelOperator D(kernel);
  SpaceTimeField base(geom, uniform_times(horizon, options.time_steps), ev);
  if (ev && u0) base = D.propagate_initial(*u0, base);
  const double room = delta - xnorm(base);
  if (!(room > 0.0)) throw PreconditionError("measure_contraction: the free evolution of u0 already fills the ball");

  ContractionReport rep;
  rep.pairs = pairs;
  rep.seed = seed;
  rep.ratios.assign(pairs, 0.0);
  detail::parallel_for(pairs, [&](std::size_t k) {
    std::mt19937_64 rng(seed + 15485863 * k);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    const double a1 = unit(rng), a2 = unit(rng);
    const SpaceTimeField u1 =
        base + random_iterate(geom, ev, horizon, options.time_steps, options.bandlimit, a1 * room, seed + 3 * k + 1);
    SpaceTimeField u2 = u1;
    if (k + 1 == pairs && pairs > 1) {
      u2 += random_iterate(geom, ev, horizon, options.time_steps, options.bandlimit, 1e-6 * room, seed + 3 * k + 2);
    } else {
      u2 = base + random_iterate(geom, ev, horizon, options.time_steps, options.bandlimit, a2 * room, seed + 3 * k + 2);
    }
    // G(u1) - G(u2) = D(Q(u1) - Q(u2)); the common terms cancel exactly.
    const double num = xnorm(D.convolve(quadratic_part(u1) - quadratic_part(u2)));
    rep.ratios[k] = num / xnorm(u1 - u2);
  });
  rep.sup_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  return rep;
}

namespace {

// m-th derivative in arc length of a 1-D field on a base of radius `radius`.
std::vector<double> arc_derivative(const BaseGeometry& geom, std::span<const double> values, double radius, int m) {
  auto c = geom.analyze(values);
  const double scale = geom.is_round() ? std::pow(radius, -m) : 1.0;
  const std::size_t last = c.size() - 2;
  for (std::size_t j = 0; j < c.size(); j += 2) {
    const double kw = std::sqrt(-geom.unit_eigenvalue(j));
    if (j == last && m % 2 == 1) {
      c[j] = c[j + 1] = 0.0;
      continue;
    }
    double re = c[j], im = c[j + 1];
    for (int q = 0; q < m; ++q) {
      const double nre = -kw * im, nim = kw * re;
      re = nre, im = nim;
    }
    c[j] = re * scale;
    c[j + 1] = im * scale;
  }
  return geom.synthesize(c);
}

// Components of grad^{alpha+1} u in an orthonormal frame, one vector per component.
std::vector<std::vector<double>> derivative_components(const SpaceTimeField& u, std::size_t j, int alpha) {
  const BaseGeometry& geom = u.geometry();
  const double radius = u.base_radius(j);
  if (geom.dimension() == 1) return {arc_derivative(geom, u.slice(j), radius, alpha + 1)};
  const FieldJet jet = geom.jet(u.slice(j), radius);
  if (alpha == 0) return {jet.grad[0], jet.grad[1]};
  // Frobenius norm counts the off-diagonal entry twice.
  std::vector<double> off = jet.hess[1];
  for (double& v : off) v *= std::sqrt(2.0);
  return {jet.hess[0], off, jet.hess[2]};
}

}  // namespace

std::vector<DerivativeEstimate> derivative_estimates(const SpaceTimeField& u, int max_alpha, int max_k) {
  const int n = u.geometry().dimension();
  if (max_alpha < 0 || max_alpha > (n == 1 ? 2 : 1))
    throw UnsupportedError("derivative_estimates: alpha must be at most " + std::to_string(n == 1 ? 2 : 1) +
                           " on this base");
  if (max_k < 0 || max_k > 1) throw UnsupportedError("derivative_estimates: k must be 0 or 1");
  const std::size_t J = u.time_count() - 1;
  if (max_k == 1 && J < 4) throw DomainError("derivative_estimates: time grid too coarse for k = 1");
  const double u0_size = c01_norm(u.graph(0));
  const auto times = u.times();

  std::vector<DerivativeEstimate> out;
  for (int alpha = 0; alpha <= max_alpha; ++alpha) {
    std::vector<std::vector<std::vector<double>>> comps(J + 1);
    detail::parallel_for(J + 1, [&](std::size_t j) { comps[j] = derivative_components(u, j, alpha); });
    for (int k = 0; k <= max_k; ++k) {
      DerivativeEstimate e{alpha, k, 0.0, 0.0};
      for (std::size_t j = 1; j <= J; ++j) {
        const double t = times[j];
        const double weight = std::pow(t, 0.5 * alpha) * (k == 1 ? t : 1.0);
        for (std::size_t i = 0; i < u.point_count(); ++i) {
          double sq = 0.0;
          for (std::size_t c = 0; c < comps[j].size(); ++c) {
            double v = comps[j][c][i];
            if (k == 1) {
              if (j < J) {
                const double hm = t - times[j - 1], hp = times[j + 1] - t;
                // Three-point derivative on a possibly nonuniform grid.
                v = (-hp / (hm * (hm + hp))) * comps[j - 1][c][i] + ((hp - hm) / (hm * hp)) * comps[j][c][i] +
                    (hm / (hp * (hm + hp))) * comps[j + 1][c][i];
              } else {
                const double h1 = t - times[j - 1], h2 = times[j - 1] - times[j - 2];
                v = ((2 * h1 + h2) / (h1 * (h1 + h2))) * comps[j][c][i] - ((h1 + h2) / (h1 * h2)) * comps[j - 1][c][i] +
                    (h1 / (h2 * (h1 + h2))) * comps[j - 2][c][i];
              }
            }
            sq += v * v;
          }
          e.sup = std::max(e.sup, weight * std::sqrt(sq));
        }
      }
      e.C = u0_size > 0.0 ? e.sup / u0_size : e.sup;
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace mcf
