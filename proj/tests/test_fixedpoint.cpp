#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcf/errors.hpp"
#include "mcf/fixedpoint.hpp"

using namespace mcf;
using std::numbers::pi;

namespace {

double max_error(const SpaceTimeField& u, auto&& exact) {
  double e = 0.0;
  for (std::size_t j = 0; j < u.time_count(); ++j)
    for (std::size_t i = 0; i < u.point_count(); ++i)
      e = std::max(e, std::abs(u.slice(j)[i] - exact(u.geometry().point(i), u.times()[j])));
  return e;
}

GraphFunction cosine(const BaseGeometry& c, double eps, int k = 3) {
  std::vector<double> f(c.point_count());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = eps * std::cos(k * c.point(i)[0]);
  return GraphFunction(c, f, c.scale(), 0.0);
}

}  // namespace

TEST_CASE("choose_constants recipe") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  auto r = choose_constants(c, {1.0, 1.0, 1.0});
  CHECK(r.delta == doctest::Approx(0.25));
  CHECK(r.sqrt_T == doctest::Approx(0.125));
  CHECK(r.horizon == doctest::Approx(0.015625));
  auto line = make_base(BaseKind::PeriodicLine, 1, 2 * pi, 64);
  CHECK(choose_constants(line, {1.0, 1.0, 1.0}).sqrt_T == doctest::Approx(0.5 * line.injectivity_radius()));
  CHECK(choose_constants(c, {1.0, 2.0, 1.0}).delta == doctest::Approx(0.125));
  CHECK_THROWS_AS(choose_constants(c, {0.0, 1.0, 1.0}), std::invalid_argument);
  auto p = choose_perturbation_constants({1.0, 1.0, 2.0}, 0.0);
  CHECK(p.delta == doctest::Approx(0.25));
  CHECK(p.epsilon == doctest::Approx(0.125));
  CHECK(choose_perturbation_constants({1.0, 1.0, 2.0}, 0.1).epsilon == doctest::Approx(0.05));
}

TEST_CASE("existence on the flat line is trivial") {
  auto line = make_base(BaseKind::PeriodicLine, 1, 2 * pi, 64);
  PicardConfig cfg{.horizon = 0.05, .delta = 0.1, .time_steps = 64};
  auto sol = solve_existence(line, cfg);
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  for (double v : sol.u.data()) CHECK(v == 0.0);
}

TEST_CASE("existence reproduces the shrinking circle and sphere") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 128);
  PicardConfig cfg{.horizon = 0.05, .delta = 0.15, .time_steps = 128};
  auto sol = solve_existence(c, cfg);
  CHECK(sol.converged);
  CHECK(max_error(sol.u, [](Point, double t) { return std::sqrt(1 - 2 * t) - 1; }) < 1e-3);
  CHECK(sol.residual < 2 * cfg.tolerance);
  CHECK(sol.norm <= cfg.delta);
  for (std::size_t m = 1; m < sol.ratios.size(); ++m) CHECK(sol.ratios[m] <= 0.55);
  for (double v : sol.u.slice(0)) CHECK(v == 0.0);

  auto s = make_base(BaseKind::Sphere, 2, 1.0, 32);
  PicardConfig sc{.horizon = 0.02, .delta = 0.15, .time_steps = 64};
  auto ss = solve_existence(s, sc);
  CHECK(max_error(ss.u, [](Point, double t) { return std::sqrt(1 - 4 * t) - 1; }) < 1e-3);
}

TEST_CASE("existence failures are reported") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  PicardConfig tight{.horizon = 0.05, .delta = 0.01, .time_steps = 64};
  CHECK_THROWS_AS(solve_existence(c, tight), BallExitError);
  PicardConfig short_run{.horizon = 0.05, .delta = 0.2, .tolerance = 1e-15, .max_iterations = 2, .time_steps = 64};
  try {
    solve_existence(c, short_run);
    FAIL("expected ConvergenceError");
  } catch (const BallExitError&) {
    FAIL("unexpected ball exit");
  } catch (const ConvergenceError& e) {
    CHECK(e.distances().size() == 2);
  }
  PicardConfig bad{.delta = -1.0};
  CHECK_THROWS_AS(solve_existence(c, bad), std::invalid_argument);
}

TEST_CASE("uniqueness in the ball") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  PicardConfig cfg{.horizon = 0.05, .delta = 0.15, .time_steps = 64};
  auto a = solve_existence(c, cfg);
  auto start = random_iterate(c, std::nullopt, 0.05, 64, 0, 0.1, 11);
  auto b = solve_existence(c, cfg, start);
  CHECK(b.iterations > a.iterations);
  CHECK(xt_norm(a.u - b.u, 0.05, {.refinement_check = false}).value < 2 * cfg.tolerance);
}

TEST_CASE("fitted constants give a contraction") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  FitOptions fo{.operator_probes = 8, .pair_probes = 8, .time_steps = 64};
  auto fit = fit_existence_constants(c, 0.05, 5, fo);
  CHECK(fit.constants.C1 > 0.0);
  CHECK(fit.constants.C2 > 0.0);
  CHECK(fit.constants.C3 > 0.0);
  CHECK(fit.choice.delta <= fit.ball_radius);
  CHECK(fit.choice.horizon >= fit.fitted_horizon * (1 - 1e-9));
  auto rep = measure_contraction(MapKind::Existence, c, std::nullopt, fit.choice.delta, fit.fitted_horizon, 10, 9, {}, fo);
  CHECK(rep.ratios.size() == 10);
  for (double r : rep.ratios) CHECK(std::isfinite(r));
  CHECK(rep.sup_ratio <= 0.5);
  // Lipschitz constant of the map is proportional to delta.
  auto half = measure_contraction(MapKind::Existence, c, std::nullopt, 0.5 * fit.choice.delta, fit.fitted_horizon, 10, 9,
                                  {}, fo);
  CHECK(half.sup_ratio / rep.sup_ratio == doctest::Approx(0.5).epsilon(0.3));
}

TEST_CASE("perturbation of the shrinking circle") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  EvolvingGeometry ev(c, 0.4);
  PicardConfig cfg{.horizon = 0.05, .delta = 0.1, .time_steps = 64};
  std::vector<double> zero(64, 0.0), shift(64, 0.01);
  auto z = solve_perturbation(ev, GraphFunction(c, zero, 1.0, 0.0), cfg);
  for (double v : z.u.data()) CHECK(v == 0.0);

  auto s = solve_perturbation(ev, GraphFunction(c, shift, 1.0, 0.0), cfg);
  CHECK(max_error(s.u, [](Point, double t) { return std::sqrt(1.01 * 1.01 - 2 * t) - std::sqrt(1 - 2 * t); }) < 1e-3);
  for (const auto& d : derivative_estimates(s.u, 0, 0)) CHECK(d.sup < 1e-12);

  const auto u0 = cosine(c, 1e-2);
  auto p = solve_perturbation(ev, u0, cfg);
  CHECK(p.converged);
  double sup = 0.0;
  for (std::size_t j = 0; j < p.u.time_count(); ++j) sup = std::max(sup, c01_norm(p.u.graph(j)));
  CHECK(sup <= 2.0 * c01_norm(u0));
  for (double v : p.u.slice(0)) CHECK(std::isfinite(v));
  CHECK(p.u.slice(0)[3] == doctest::Approx(u0[3]).epsilon(1e-12));

  CHECK_THROWS_AS(solve_perturbation(ev, u0, cfg, 0.01), PreconditionError);
}

TEST_CASE("perturbation constants and contraction") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  EvolvingGeometry ev(c, 0.4);
  FitOptions fo{.operator_probes = 6, .pair_probes = 6, .initial_probes = 4, .time_steps = 64};
  auto fit = fit_perturbation_constants(ev, 0.05, 2, fo);
  CHECK(fit.choice.epsilon > 0.0);
  CHECK(fit.choice.epsilon == doctest::Approx(fit.choice.delta / fit.constants.C6));
  // Propagation of a constant: X of e^{tau} over its C01 norm.
  CHECK(fit.constants.C6 >= 1.0);
  const auto u0 = cosine(c, 1e-3);
  auto rep = measure_contraction(MapKind::Perturbation, c, ev, fit.choice.delta, 0.05, 6, 4, u0, fo);
  CHECK(rep.sup_ratio <= 0.5);
  CHECK_THROWS_AS(fit_perturbation_constants(ev, 0.6, 2, fo), DomainError);
}

TEST_CASE("derivative estimates") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  EvolvingGeometry ev(c, 0.4);
  SpaceTimeField zero(c, uniform_times(0.05, 32), ev);
  for (const auto& d : derivative_estimates(zero, 2, 1)) CHECK(d.sup == 0.0);

  double prev[6] = {};
  int idx = 0;
  for (int J : {64, 128}) {
    PicardConfig cfg{.horizon = 0.05, .delta = 0.1, .time_steps = J};
    auto p = solve_perturbation(ev, cosine(c, 1e-2), cfg);
    const auto est = derivative_estimates(p.u, 2, 1);
    REQUIRE(est.size() == 6);
    for (std::size_t q = 0; q < est.size(); ++q) {
      CHECK(std::isfinite(est[q].C));
      if (idx == 1) CHECK(est[q].C == doctest::Approx(prev[q]).epsilon(0.1));
      prev[q] = est[q].C;
    }
    ++idx;
  }
  SpaceTimeField coarse(c, uniform_times(0.05, 3), ev);
  CHECK_THROWS_AS(derivative_estimates(coarse, 0, 1), DomainError);
  auto s = make_base(BaseKind::Sphere, 2, 1.0, 32);
  SpaceTimeField sf(s, uniform_times(0.02, 16));
  CHECK_THROWS_AS(derivative_estimates(sf, 2, 0), UnsupportedError);
  CHECK(derivative_estimates(sf, 1, 1).size() == 4);
}
