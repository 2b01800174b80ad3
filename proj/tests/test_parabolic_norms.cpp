#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mcf/errors.hpp"
#include "mcf/parabolic_norms.hpp"

using namespace mcf;
using std::numbers::pi;

namespace {

template <class F>
SpaceTimeField field(const BaseGeometry& g, double T, int J, F&& f, std::optional<EvolvingGeometry> ev = {}) {
  SpaceTimeField u(g, uniform_times(T, J), ev);
  for (std::size_t j = 0; j < u.time_count(); ++j) {
    auto s = u.slice(j);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = f(g.point(i), u.times()[j]);
  }
  return u;
}

SpaceTimeField random_field(const BaseGeometry& g, double T, int J, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SpaceTimeField u(g, uniform_times(T, J));
  std::vector<double> c0(g.coefficient_count()), c1(g.coefficient_count());
  for (std::size_t j = 0; j < c0.size(); ++j)
    if (g.degree(j) <= 5) {
      c0[j] = nd(rng);
      c1[j] = nd(rng);
    }
  auto f0 = g.synthesize(c0), f1 = g.synthesize(c1);
  for (std::size_t j = 0; j < u.time_count(); ++j) {
    const double s = u.times()[j] / T;
    auto sl = u.slice(j);
    for (std::size_t i = 0; i < sl.size(); ++i) sl[i] = f0[i] + s * f1[i];
  }
  return u;
}

// Independent oracle for a cos(theta) on the unit circle: composite Simpson in
// space and time over every grid centre and ladder radius.
double cosine_hessian_term(double a, double T, int N) {
  auto g = make_base(BaseKind::Circle, 1, 1.0, N);
  const auto ladder = dyadic_ladder(g, T);
  double best = 0.0;
  for (int c = 0; c < N; ++c) {
    const double x = 2 * pi * c / N;
    for (double r : ladder) {
      const int m = 2000;
      double s = 0.0;
      for (int k = 0; k <= m; ++k) {
        const double th = x - r + 2 * r * k / m;
        const double w = (k == 0 || k == m) ? 1 : (k % 2 ? 4 : 2);
        s += w * std::pow(std::abs(a * std::cos(th)), 5);
      }
      s *= 2 * r / m / 3;
      const double integral = s * (0.5 * r * r);  // time-independent integrand
      best = std::max(best, std::pow(r, 0.4) * std::pow(integral, 0.2));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("constant and zero fields") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  auto u = field(c, 0.05, 64, [](Point, double) { return 0.3; });
  auto x = xt_norm(u, 0.05);
  CHECK(x.value == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(x.hessian_term < 1e-12);
  auto z = field(c, 0.05, 64, [](Point, double) { return 0.0; });
  CHECK(xt_norm(z, 0.05).value == 0.0);
  CHECK(yt_norm(z, 0.05).value == 0.0);
}

TEST_CASE("yt norm of a constant is closed form") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 128);
  auto q = field(c, 0.04, 128, [](Point, double) { return 2.5; });
  auto y = yt_norm(q, 0.04);
  // Maximised at r = 0.2: 0.2^{2/5} (0.4 * 0.02)^{1/5} = 0.2 exactly.
  CHECK(y.value == doctest::Approx(2.5 * 0.2).epsilon(1e-12));
  CHECK(y.argmax_r == doctest::Approx(0.2));
  auto q3 = field(c, 0.04, 128, [](Point, double) { return -7.5; });
  CHECK(yt_norm(q3, 0.04).value == doctest::Approx(3.0 * y.value).epsilon(1e-12));

  auto s = make_base(BaseKind::Sphere, 2, 1.0, 32);
  auto qs = field(s, 0.04, 64, [](Point, double) { return 1.0; });
  const double cap = 2 * pi * (1 - std::cos(0.2));
  CHECK(yt_norm(qs, 0.04).value == doctest::Approx(std::pow(0.2, 1.0 / 3) * std::pow(cap * 0.02, 1.0 / 6)));
}

TEST_CASE("xt norm of a cosine matches direct quadrature") {
  const double a = 0.3, T = 1.0;
  double values[2];
  int idx = 0;
  for (int N : {64, 128}) {
    auto c = make_base(BaseKind::Circle, 1, 1.0, N);
    auto u = field(c, T, 1024, [a](Point p, double) { return a * std::cos(p[0]); });
    auto x = xt_norm(u, T);
    const double oracle = cosine_hessian_term(a, T, N);
    CHECK(x.sup_u == doctest::Approx(a).epsilon(1e-12));
    CHECK(x.sup_grad == doctest::Approx(a).epsilon(1e-3));
    CHECK(x.hessian_term == doctest::Approx(oracle).epsilon(0.01));
    CHECK(x.refinement_stable);
    values[idx++] = x.value;
  }
  CHECK(values[1] == doctest::Approx(values[0]).epsilon(0.01));
}

TEST_CASE("c01 norm") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 128);
  std::vector<double> f(128), k(128, 0.4), z(128, 0.0);
  for (int i = 0; i < 128; ++i) f[i] = 1e-2 * std::cos(3 * 2 * pi * i / 128);
  CHECK(c01_norm(GraphFunction(c, f)) == doctest::Approx(4e-2).epsilon(1e-10));
  CHECK(c01_norm(GraphFunction(c, k)) == doctest::Approx(0.4));
  CHECK(c01_norm(GraphFunction(c, z)) == 0.0);
}

TEST_CASE("norm axioms on sampled fields") {
  for (auto g : {make_base(BaseKind::Circle, 1, 1.0, 64), make_base(BaseKind::PeriodicPlane, 2, 2 * pi, 16),
                 make_base(BaseKind::Sphere, 2, 1.0, 32)}) {
    const double T = 0.04;
    auto u = random_field(g, T, 64, 1), v = random_field(g, T, 64, 2);
    const NormOptions fast{.refinement_check = false};
    const double xu = xt_norm(u, T, fast).value, xv = xt_norm(v, T, fast).value;
    CHECK(xt_norm(u + v, T, fast).value <= xu + xv + 1e-12);
    CHECK(xt_norm(-2.0 * u, T, fast).value == doctest::Approx(2.0 * xu).epsilon(1e-12));
    const double yu = yt_norm(u, T, fast).value, yv = yt_norm(v, T, fast).value;
    CHECK(yt_norm(u + v, T, fast).value <= yu + yv + 1e-12);
    CHECK(yt_norm(3.0 * u, T, fast).value == doctest::Approx(3.0 * yu).epsilon(1e-12));
    for (std::size_t j = 0; j < u.time_count(); j += 8) CHECK(c01_norm(u.graph(j)) <= xu + 1e-12);
    CHECK(xt_norm(u, T / 2, fast).value <= xu + 1e-12);
  }
}

TEST_CASE("fixed and evolving metric norms are equivalent") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 64);
  const double T = 0.2;
  EvolvingGeometry ev(c, T);
  auto u = field(c, T, 128, [](Point p, double t) { return 0.01 * std::cos(3 * p[0]) * (1 + t); }, ev);
  const double C0 = 1.0 / (ev.radius(T) * ev.radius(T));
  const double bound = std::pow(C0, 7.0 / 5.0);
  const auto evolving = xt_norm(u, T);
  const auto fixed = xt_norm(u, T, {.fixed_metric = true});
  CHECK(evolving.value <= bound * fixed.value);
  CHECK(fixed.value <= bound * evolving.value);
  CHECK(evolving.value > fixed.value);  // the base shrinks, so gradients grow
}

TEST_CASE("time grid too coarse") {
  auto c = make_base(BaseKind::Circle, 1, 1.0, 256);
  auto u = field(c, 0.05, 16, [](Point p, double) { return std::cos(p[0]); });
  CHECK_THROWS_AS(xt_norm(u, 0.05), DomainError);
  CHECK_THROWS_AS(xt_norm(u, 0.1), DomainError);  // beyond the stored horizon
}
