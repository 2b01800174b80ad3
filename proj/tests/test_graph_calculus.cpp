#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mcf/errors.hpp"
#include "mcf/graph_calculus.hpp"
#include "mcf/parabolic_norms.hpp"

using namespace mcf;
using std::numbers::pi;

namespace {

template <class F>
GraphFunction sample(const BaseGeometry& g, F&& f) {
  std::vector<double> v(g.point_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.point(i));
  return GraphFunction(g, v);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Random smooth shape with a handful of low modes, unit sup norm.
GraphFunction random_shape(const BaseGeometry& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> c(g.coefficient_count(), 0.0);
  for (std::size_t j = 0; j < c.size(); ++j)
    if (g.degree(j) <= 4) c[j] = nd(rng) / (1.0 + g.degree(j) * g.degree(j));
  auto f = g.synthesize(c);
  const double m = max_abs(f);
  for (auto& x : f) x /= m;
  return GraphFunction(g, f);
}

}  // namespace

TEST_CASE("area element and speed factor") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  for (auto g : {c, make_base(BaseKind::Sphere, 2, 1.0, 32), make_base(BaseKind::PeriodicLine, 1, 3.0, 32),
                 make_base(BaseKind::PeriodicPlane, 2, 3.0, 16)}) {
    GraphFunction z(g, std::vector<double>(g.point_count(), 0.0));
    for (double x : area_element_v(z)) CHECK(x == doctest::Approx(1.0).epsilon(1e-14));
    for (double x : speed_w(z)) CHECK(x == doctest::Approx(1.0).epsilon(1e-14));
  }
  auto shifted = sample(c, [](Point) { return 0.1; });
  for (double x : area_element_v(shifted)) CHECK(x == doctest::Approx(1.1).epsilon(1e-13));
  for (double x : speed_w(shifted)) CHECK(x == doctest::Approx(1.0).epsilon(1e-13));

  auto line = make_base(BaseKind::PeriodicLine, 1, 2 * pi, 64);
  auto s = sample(line, [](Point p) { return std::sin(p[0]); });
  CHECK(area_element_v(s)[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(speed_w(s)[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("mean curvature of graphs") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  for (double h : mean_curvature_graph(sample(c, [](Point) { return 0.0; }))) CHECK(h == doctest::Approx(1.0));
  auto bump = sample(c, [](Point p) { return 0.1 * std::cos(p[0]); });
  CHECK(mean_curvature_graph(bump)[0] == doctest::Approx(1.32 / 1.331).epsilon(1e-12));
  for (double x : {0.1, -0.2, 0.5}) {
    for (double h : mean_curvature_graph(sample(c, [x](Point) { return x; })))
      CHECK(h == doctest::Approx(1.0 / (1.0 + x)).epsilon(1e-13));
  }
  auto s = make_base(BaseKind::Sphere, 2, 1.0, 32);
  for (double h : mean_curvature_graph(sample(s, [](Point) { return 0.0; }))) CHECK(h == doctest::Approx(2.0));
  for (double h : mean_curvature_graph(sample(s, [](Point) { return 0.25; })))
    CHECK(h == doctest::Approx(2.0 / 1.25).epsilon(1e-13));
  for (double a : second_fundamental_form_norm2(sample(s, [](Point) { return 0.25; })))
    CHECK(a == doctest::Approx(2.0 / (1.25 * 1.25)).epsilon(1e-13));
}

TEST_CASE("polar curvature formula cross-check with finite differences") {
  // kappa = (r^2 + 2 r'^2 - r r'') / (r^2 + r'^2)^{3/2} with centred differences.
  double prev = 0.0;
  for (int N : {64, 128, 256}) {
    auto c = make_base(BaseKind::Circle, 1, 1.0, N);
    auto u = sample(c, [](Point p) { return 0.1 * std::cos(3 * p[0]) + 0.05 * std::sin(p[0]); });
    auto H = mean_curvature_graph(u);
    const double h = 2 * pi / N;
    double err = 0.0;
    for (int i = 0; i < N; ++i) {
      const double rm = 1 + u[(i + N - 1) % N], r0 = 1 + u[i], rp = 1 + u[(i + 1) % N];
      const double r1 = (rp - rm) / (2 * h), r2 = (rp - 2 * r0 + rm) / (h * h);
      const double k = (r0 * r0 + 2 * r1 * r1 - r0 * r2) / std::pow(r0 * r0 + r1 * r1, 1.5);
      err = std::max(err, std::abs(k - H[i]));
    }
    if (prev > 0.0) CHECK(err < prev / 3.5);  // second order
    prev = err;
  }
}

TEST_CASE("radial graph mean curvature agrees with matrix form on the sphere") {
  auto s = make_base(BaseKind::Sphere, 2, 1.3, 32);
  auto u0 = random_shape(s, 11);
  std::vector<double> v(u0.values().begin(), u0.values().end());
  for (auto& x : v) x *= 0.1;
  GraphFunction u(s, v);
  auto H = mean_curvature_graph(u);
  // Matrix form: g = r^2 I + a a^T, h = (r^2 I + 2 a a^T - r b) / sqrt(r^2 + |a|^2).
  auto j = s.jet(u.values(), 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = 1.3 + v[i], a1 = j.grad[0][i], a2 = j.grad[1][i];
    const double q = std::sqrt(r * r + a1 * a1 + a2 * a2);
    const double g11 = r * r + a1 * a1, g12 = a1 * a2, g22 = r * r + a2 * a2;
    const double h11 = (r * r + 2 * a1 * a1 - r * j.hess[0][i]) / q;
    const double h12 = (2 * a1 * a2 - r * j.hess[1][i]) / q;
    const double h22 = (r * r + 2 * a2 * a2 - r * j.hess[2][i]) / q;
    const double det = g11 * g22 - g12 * g12;
    const double Hm = (g22 * h11 - 2 * g12 * h12 + g11 * h22) / det;
    CHECK(H[i] == doctest::Approx(Hm).epsilon(1e-12));
  }
}

TEST_CASE("linearized operator") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  for (double x : linearized_L(sample(c, [](Point) { return 0.3; }))) CHECK(x == doctest::Approx(0.3));
  for (int k : {1, 2, 5}) {
    auto u = sample(c, [k](Point p) { return std::cos(k * p[0]); });
    auto L = linearized_L(u);
    for (std::size_t i = 0; i < L.size(); ++i) CHECK(L[i] == doctest::Approx((1.0 - k * k) * u[i]).scale(1.0));
  }
  auto line = make_base(BaseKind::PeriodicLine, 1, 2.0, 32);
  for (double x : linearized_L(sample(line, [](Point) { return 0.7; }))) CHECK(std::abs(x) < 1e-14);
}

TEST_CASE("nonlinearity examples") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  for (double x : nonlinearity_Q(sample(c, [](Point) { return 0.0; }))) CHECK(x == 0.0);
  for (double x : nonlinearity_Q(sample(c, [](Point) { return 0.1; })))
    CHECK(x == doctest::Approx(-0.01 / 1.1).epsilon(1e-12));
  auto line = make_base(BaseKind::PeriodicLine, 1, 2 * pi, 128);
  auto q = nonlinearity_Q(sample(line, [](Point p) { return 0.1 * std::sin(p[0]); }));
  const double up = 0.1 * std::cos(pi / 4), upp = -0.1 * std::sin(pi / 4);
  CHECK(q[16] == doctest::Approx(-upp * up * up / (1 + up * up)).epsilon(1e-12));
  CHECK(q[16] == doctest::Approx(3.5180e-4).epsilon(1e-4));

  auto s = make_base(BaseKind::Sphere, 2, 1.0, 32);
  for (double x : nonlinearity_Q(sample(s, [](Point) { return 0.0; }))) CHECK(x == 0.0);
  // Shifted sphere: -2/(1+x) + 2 - (2x) = -2x^2/(1+x).
  for (double x : nonlinearity_Q(sample(s, [](Point) { return 0.1; })))
    CHECK(x == doctest::Approx(-0.02 / 1.1).epsilon(1e-12));
}

TEST_CASE("nonlinearity rejects large heights") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  CHECK_THROWS_AS(nonlinearity_Q(sample(c, [](Point) { return 0.4; })), GraphValidityError);
  CHECK_THROWS_AS(nonlinearity_Q(sample(c, [](Point p) { return 0.05 * std::cos(8 * p[0]); })),
                  GraphValidityError);
  CHECK_THROWS_AS(speed_w(sample(c, [](Point) { return -1.5; })), GraphValidityError);
  CHECK_NOTHROW(speed_w(sample(c, [](Point) { return 0.4; })));
}

TEST_CASE("exact decomposition of the normal speed") {
  for (auto g : {make_base(BaseKind::Circle, 1, 1.4, 64), make_base(BaseKind::Sphere, 2, 1.0, 32),
                 make_base(BaseKind::PeriodicLine, 1, 6.0, 64), make_base(BaseKind::PeriodicPlane, 2, 6.0, 32)}) {
    auto shape = random_shape(g, 5);
    std::vector<double> v(shape.values().begin(), shape.values().end());
    for (auto& x : v) x *= 0.02;
    GraphFunction u(g, v);
    auto speed = normal_speed(u);
    auto L = linearized_L(u);
    auto Q = nonlinearity_Q(u);
    const double H0 = g.mean_curvature();
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(speed[i] == doctest::Approx(-H0 + L[i] + Q[i]).epsilon(1e-14));
  }
}

TEST_CASE("nonlinearity is quadratic") {
  for (auto g : {make_base(BaseKind::Circle, 1, 1.0, 64), make_base(BaseKind::Sphere, 2, 1.0, 32),
                 make_base(BaseKind::PeriodicLine, 1, 2 * pi, 64), make_base(BaseKind::PeriodicPlane, 2, 2 * pi, 32)}) {
    auto shape = random_shape(g, 9);
    std::vector<double> ratios;
    for (double s : {1e-1, 1e-2, 1e-3}) {
      std::vector<double> v(shape.values().begin(), shape.values().end());
      for (auto& x : v) x *= s * 0.1;
      ratios.push_back(max_abs(nonlinearity_Q(GraphFunction(g, v))) / (s * s));
    }
    if (g.is_round()) {
      CHECK(std::abs(ratios[2] / ratios[1] - 1.0) < 0.05);
    } else {
      // Flat graphs: Q = -u_i u_j u_ij / (1 + |Du|^2) is cubic.
      CHECK(ratios[2] == doctest::Approx(0.1 * ratios[1]).epsilon(0.05));
    }
    CHECK(ratios[2] * 1e-3 < 1e-2 * ratios[0]);  // Q(su)/s -> 0
  }
}

TEST_CASE("quadratic bounds report") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  GraphFunction z(c, std::vector<double>(64, 0.0));
  auto rep = check_quadratic_bounds(z, z, 0.0);
  CHECK(rep.pass());
  CHECK(rep.fitted_single == 0.0);

  auto u = sample(c, [](Point) { return 0.1; });
  auto v = sample(c, [](Point) { return 0.05; });
  auto qu = nonlinearity_Q(u), qv = nonlinearity_Q(v);
  const double expected = std::abs(-0.01 / 1.1 + 0.0025 / 1.05);
  CHECK(std::abs(qu[3] - qv[3]) == doctest::Approx(expected).epsilon(1e-12));
  // Constant shifts: |Q(x)| / x^2 = 1/(1+x); difference bound with |u|+|v| = 0.15.
  auto r = check_quadratic_bounds(u, v, 1.0);
  CHECK(r.fitted_single == doctest::Approx(1.0 / 1.1).epsilon(1e-10));
  CHECK(r.fitted_difference == doctest::Approx(expected / (0.15 * 0.05)).epsilon(1e-10));
  CHECK(r.pass());
  CHECK_FALSE(check_quadratic_bounds(u, v, 0.5).pass());
}

TEST_CASE("evolving nonlinearity") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  EvolvingGeometry ev(c, 0.3);
  for (double x : nonlinearity_Q_t(sample(c, [](Point) { return 0.0; }), ev, 0.2)) CHECK(std::abs(x) < 1e-14);
  for (double x : nonlinearity_Q_t(sample(c, [](Point) { return 0.1; }), ev, 0.0))
    CHECK(x == doctest::Approx(-0.01 / 1.1).epsilon(1e-12));

  // Difference of concentric shrinking circles solves u_t = L_t u + Q_t(u).
  for (double t : {0.0, 0.1, 0.25}) {
    const double a = std::sqrt(1.1025 - 2 * t), b = std::sqrt(1 - 2 * t);
    auto u = GraphFunction(c, std::vector<double>(64, a - b), b, t);
    auto q = nonlinearity_Q_t(u, ev, t);
    auto L = linearized_L(u);
    const double ut = -1 / a + 1 / b;
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(ut - L[i] - q[i]) < 1e-13);
  }
}
