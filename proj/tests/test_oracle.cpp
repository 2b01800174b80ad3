#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcf/errors.hpp"
#include "mcf/fixedpoint.hpp"
#include "mcf/graph_calculus.hpp"
#include "mcf/oracle.hpp"

using namespace mcf;
using std::numbers::pi;

namespace {

std::vector<double> sample(const BaseGeometry& g, auto&& f) {
  std::vector<double> v(g.point_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.point(i));
  return v;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("exact catalog values") {
  const Point x{0.3, 0.0};
  CHECK(exact_eval({ExactKind::ShrinkingCircle}, x, 0.25) == doctest::Approx(-0.2928932).epsilon(1e-7));
  CHECK(exact_eval({ExactKind::StaticFlat}, x, 3.0) == 0.0);
  CHECK(exact_eval({.kind = ExactKind::ConcentricDifference, .R0 = 1.0, .R0_prime = 1.05}, x, 0.1) ==
        doctest::Approx(0.0555728).epsilon(1e-7));
  CHECK(exact_eval({ExactKind::ShrinkingSphere}, x, 0.1) == doctest::Approx(std::sqrt(0.6) - 1.0));
  CHECK_THROWS_AS(exact_eval({ExactKind::ShrinkingCircle}, x, 0.5), DomainError);
  CHECK_THROWS_AS(exact_eval({ExactKind::ShrinkingSphere}, x, 0.25), DomainError);
  CHECK_THROWS_AS(exact_eval({ExactKind::ShrinkingCircle}, x, -0.1), DomainError);
  CHECK(exact_kind_from_string("ConcentricDifference") == ExactKind::ConcentricDifference);
  CHECK_THROWS_AS(exact_kind_from_string("Torus"), std::invalid_argument);
}

TEST_CASE("catalog solutions satisfy the flow equation") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 32);
  auto s = make_base(BaseKind::Sphere, 2, 1.0, 16);
  const Point x{0.0, 0.0};
  for (double t : {0.0, 0.05, 0.1}) {
    for (auto [sol, g] : {std::pair{ExactSolution{ExactKind::ShrinkingCircle}, c},
                          std::pair{ExactSolution{ExactKind::ShrinkingSphere}, s}}) {
      std::vector<double> u(g.point_count(), exact_eval(sol, x, t));
      const auto speed = normal_speed(GraphFunction(g, u, 1.0, t));
      const auto oracle = oracle_velocity(GraphFunction(g, u, 1.0, t));
      for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK(std::abs(speed[i] - exact_time_derivative(sol, x, t)) < 1e-10);
        CHECK(std::abs(oracle[i] - exact_time_derivative(sol, x, t)) < 1e-10);
      }
    }
    // Over the shrinking base: u_t = speed of M_{R+u} minus the base speed.
    for (int n : {1, 2}) {
      const ExactSolution sol{.kind = ExactKind::ConcentricDifference, .dimension = n};
      const auto& g = n == 1 ? c : s;
      const double R = std::sqrt(1.0 - 2.0 * n * t);
      std::vector<double> u(g.point_count(), exact_eval(sol, x, t));
      const auto speed = normal_speed(GraphFunction(g, u, R, t));
      CHECK(std::abs(speed[3] + n / R - exact_time_derivative(sol, x, t)) < 1e-10);
    }
  }
  auto line = make_base(BaseKind::PeriodicLine, 1, 2 * pi, 32);
  auto f = exact_field({ExactKind::StaticFlat}, line, uniform_times(1.0, 4));
  for (double v : f.data()) CHECK(v == 0.0);
  CHECK_THROWS_AS(exact_field({ExactKind::ShrinkingCircle}, line, uniform_times(0.1, 4)), std::invalid_argument);
  auto cd = exact_field({.kind = ExactKind::ConcentricDifference}, c, uniform_times(0.1, 4));
  CHECK(cd.evolving().has_value());
  CHECK(cd.slice(4)[0] == doctest::Approx(0.0555728).epsilon(1e-7));
}

TEST_CASE("oracle velocity agrees with graph calculus") {
  auto c = make_base(BaseKind::Circle, 1, 1.3, 64);
  auto u = sample(c, [](Point p) { return 0.05 * std::cos(3 * p[0]) + 0.02 * std::sin(p[0]) - 0.03; });
  CHECK(max_diff(oracle_velocity(GraphFunction(c, u)), normal_speed(GraphFunction(c, u))) < 1e-10);

  auto s = make_base(BaseKind::Sphere, 2, 1.0, 32);
  auto us = sample(s, [](Point p) { return 0.04 * std::cos(p[0]) * std::cos(p[0]) + 0.03 * std::sin(p[0]) * std::cos(p[1]); });
  CHECK(max_diff(oracle_velocity(GraphFunction(s, us)), normal_speed(GraphFunction(s, us))) < 1e-9);

  auto line = make_base(BaseKind::PeriodicLine, 1, 2 * pi, 64);
  auto ul = sample(line, [](Point p) { return 0.1 * std::sin(p[0]) + 0.05 * std::cos(2 * p[0]); });
  CHECK(max_diff(oracle_velocity(GraphFunction(line, ul)), normal_speed(GraphFunction(line, ul))) < 1e-10);

  auto plane = make_base(BaseKind::PeriodicPlane, 2, 2 * pi, 64);
  auto up = sample(plane, [](Point p) { return 0.1 * std::sin(p[0]) * std::cos(2 * p[1]); });
  CHECK(max_diff(oracle_velocity(GraphFunction(plane, up)), normal_speed(GraphFunction(plane, up))) < 1e-10);
}

TEST_CASE("fd_solve examples") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 128);
  std::vector<double> zero(128, 0.0);
  auto u = fd_solve(c, GraphFunction(c, zero), 0.05, 512, 64);
  CHECK(u.time_count() == 65);
  double err = 0.0;
  for (std::size_t j = 0; j < u.time_count(); ++j)
    for (double v : u.slice(j)) err = std::max(err, std::abs(v - (std::sqrt(1 - 2 * u.times()[j]) - 1)));
  CHECK(err < 1e-4);

  auto plane = make_base(BaseKind::PeriodicPlane, 2, 2 * pi, 16);
  std::vector<double> pz(plane.point_count(), 0.0);
  auto flat = fd_solve(plane, GraphFunction(plane, pz), 0.1, 20);
  for (double v : flat.data()) CHECK(v == 0.0);

  auto line = make_base(BaseKind::PeriodicLine, 1, 2 * pi, 64);
  auto ul = fd_solve(line, GraphFunction(line, sample(line, [](Point p) { return 0.1 * std::sin(p[0]); })), 0.05, 256);
  double amp = 0.0;
  for (double v : ul.slice(ul.time_count() - 1)) amp = std::max(amp, std::abs(v));
  const double linear = 0.1 * std::exp(-0.05);
  // Q = -u''u'^2/(1+u'^2) projects positively onto sin x: the graph decays
  // more slowly than the heat equation.
  CHECK(amp > linear);
  CHECK(amp == doctest::Approx(linear).epsilon(0.05));

  CHECK_THROWS_AS(fd_solve(c, GraphFunction(c, zero), 0.05, 512, 100), std::invalid_argument);
  CHECK_THROWS_AS(fd_solve(c, GraphFunction(c, zero, 0.9), 0.05, 512), std::invalid_argument);
}

TEST_CASE("fd_solve reports loss of graph validity") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 32);
  std::vector<double> u0(32, -0.9);  // circle of radius 0.1, extinct at t = 0.005
  try {
    fd_solve(c, GraphFunction(c, u0), 0.01, 200);
    FAIL("expected GraphValidityError");
  } catch (const GraphValidityError& e) {
    CHECK(std::string(e.what()).find("t = ") != std::string::npos);
  }
}

TEST_CASE("fd_solve is second order in time") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  GraphFunction u0(c, sample(c, [](Point p) { return 0.05 * std::cos(3 * p[0]) + 0.02 * std::sin(5 * p[0]); }));
  auto terminal = [&](int steps) {
    auto u = fd_solve(c, u0, 0.05, steps, 1);
    const auto s = u.slice(1);
    return std::vector<double>(s.begin(), s.end());
  };
  const auto ref = terminal(4096), a = terminal(128), b = terminal(256);
  const double ea = max_diff(a, ref), eb = max_diff(b, ref);
  CHECK(eb < ea);
  CHECK(ea / eb > 3.0);
}

TEST_CASE("fd_solve agrees with the Picard solution") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  PicardConfig cfg{.horizon = 0.05, .delta = 0.15, .time_steps = 64};
  auto fp = solve_existence(c, cfg);
  std::vector<double> zero(64, 0.0);
  auto fd = fd_solve(c, GraphFunction(c, zero), 0.05, 256, 64);
  CHECK(max_diff(fp.u.data(), fd.data()) < 1e-3);

  // Perturbation over the shrinking base versus a static-base run of R0 + u0.
  EvolvingGeometry ev(c, 0.05);
  auto u0 = sample(c, [](Point p) { return 1e-2 * std::cos(3 * p[0]); });
  auto pert = solve_perturbation(ev, GraphFunction(c, u0, 1.0, 0.0), cfg);
  auto full = fd_solve(c, GraphFunction(c, u0), 0.05, 256, 64);
  double worst = 0.0;
  for (std::size_t j = 0; j < full.time_count(); ++j) {
    const double shift = std::sqrt(1 - 2 * full.times()[j]) - 1;
    for (std::size_t i = 0; i < 64; ++i)
      worst = std::max(worst, std::abs(full.slice(j)[i] - shift - pert.u.slice(j)[i]));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("curvature history") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  auto u = exact_field({ExactKind::ShrinkingCircle}, c, uniform_times(0.2, 8));
  auto h = curvature_history(u);
  REQUIRE(h.has_gradient());
  for (std::size_t j = 0; j < h.times.size(); ++j) {
    const double R = std::sqrt(1 - 2 * h.times[j]);
    for (double a : h.A[j]) CHECK(a == doctest::Approx(1 / R).epsilon(1e-12));
    CHECK(h.sup_grad_A[j] < 1e-10);
  }
  auto cd = curvature_history(exact_field({.kind = ExactKind::ConcentricDifference}, c, uniform_times(0.2, 4)));
  CHECK(cd.sup_A[4] == doctest::Approx(1 / std::sqrt(1.05 * 1.05 - 0.4)).epsilon(1e-12));

  auto s = make_base(BaseKind::Sphere, 2, 1.0, 16);
  auto hs = curvature_history(exact_field({ExactKind::ShrinkingSphere}, s, uniform_times(0.1, 2)));
  CHECK_FALSE(hs.has_gradient());
  CHECK(hs.sup_A[2] == doctest::Approx(std::sqrt(2.0) / std::sqrt(0.6)).epsilon(1e-10));
  CHECK(std::isnan(curvature_estimates(hs).C1));

  auto line = make_base(BaseKind::PeriodicLine, 1, 2 * pi, 64);
  SpaceTimeField lf(line, uniform_times(0.1, 1));
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 0; i < 64; ++i) lf.slice(j)[i] = 0.1 * std::sin(line.point(i)[0]);
  auto hl = curvature_history(lf);
  CHECK(hl.A[0][16] == doctest::Approx(0.1).epsilon(1e-12));  // x = pi/2: u' = 0, |u''| = 0.1
}

TEST_CASE("curvature estimates on a perturbed circle") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 128);
  GraphFunction u0(c, sample(c, [](Point p) { return 1e-2 * std::cos(3 * p[0]); }));
  double prev = 0.0;
  for (int out : {32, 64}) {
    auto u = fd_solve(c, u0, 0.05, 512, out);
    auto e = curvature_estimates(curvature_history(u));
    CHECK(e.kappa0 == doctest::Approx(1.08).epsilon(0.01));
    CHECK(e.ratio <= 2.0);
    CHECK(std::isfinite(e.C1));
    if (prev > 0.0) CHECK(e.C1 == doctest::Approx(prev).epsilon(0.1));
    prev = e.C1;
  }
}
