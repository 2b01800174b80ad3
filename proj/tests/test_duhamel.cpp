#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcf/duhamel.hpp"
#include "mcf/errors.hpp"

using namespace mcf;
using std::numbers::pi;

namespace {

BaseGeometry unit_circle(int N = 64) { return make_base(BaseKind::Circle, 1, 1.0, N); }

template <class F>
SpaceTimeField field(const BaseGeometry& g, double T, int J, F&& f, std::optional<EvolvingGeometry> ev = {}) {
  SpaceTimeField u(g, uniform_times(T, J), ev);
  for (std::size_t j = 0; j < u.time_count(); ++j) {
    auto s = u.slice(j);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = f(g.point(i), u.times()[j]);
  }
  return u;
}

double max_abs_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("propagate_initial examples") {
  auto c = unit_circle();
  DuhamelOperator G(KernelEvaluator::heat(c)), K(KernelEvaluator::schrodinger(c));
  std::vector<double> ones(64, 2.0), cos3(64), zero(64, 0.0);
  for (int i = 0; i < 64; ++i) cos3[i] = std::cos(3 * 2 * pi * i / 64);
  auto a = K.propagate_initial(GraphFunction(c, ones), 0.1);
  for (double v : a.values()) CHECK(v == doctest::Approx(2.0 * std::exp(0.1)).epsilon(1e-13));
  auto b = G.propagate_initial(GraphFunction(c, cos3), 0.1);
  CHECK(b[0] == doctest::Approx(0.4065697).epsilon(1e-7));
  for (int i = 0; i < 64; ++i) CHECK(b[i] == doctest::Approx(std::exp(-0.9) * cos3[i]).epsilon(1e-12));
  const auto z = G.propagate_initial(GraphFunction(c, zero), 0.1);
  for (double v : z.values()) CHECK(v == 0.0);

  EvolvingGeometry ev(c, 0.4);
  DuhamelOperator Kt(KernelEvaluator::evolving_schrodinger(ev));
  auto e = Kt.propagate_initial(GraphFunction(c, ones), 0.25);
  CHECK(e[5] == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(e.base_radius() == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(Kt.propagate_initial(GraphFunction(c, ones), 0.5), DomainError);
}

TEST_CASE("duhamel convolution examples") {
  auto c = unit_circle();
  DuhamelOperator G(KernelEvaluator::heat(c)), K(KernelEvaluator::schrodinger(c));
  auto one = field(c, 0.1, 64, [](Point, double) { return 1.0; });
  auto g = G.convolve(one), k = K.convolve(one);
  for (std::size_t j = 0; j < one.time_count(); ++j) {
    const double t = one.times()[j];
    CHECK(g.slice(j)[7] == doctest::Approx(t).epsilon(1e-12));
    CHECK(k.slice(j)[7] == doctest::Approx(std::exp(t) - 1.0).epsilon(1e-12));
  }
  CHECK(k.slice(64)[0] == doctest::Approx(0.1051709).epsilon(1e-7));
  for (double v : g.slice(0)) CHECK(v == 0.0);
  const auto z = G.convolve(one.zeros_like());
  for (double v : z.data()) CHECK(v == 0.0);
}

TEST_CASE("per-mode quadrature matches closed forms for polynomial sources") {
  // F = cos(k theta) (a + b s + c s^2 + d s^3): exact int_0^t e^{mu (t - s)} F_k(s) ds.
  auto c = unit_circle();
  DuhamelOperator K(KernelEvaluator::schrodinger(c));
  const double a = 0.3, b = -1.2, cc = 4.0, d = 7.0;
  for (int k : {0, 2, 9, 25}) {
    auto F = field(c, 0.2, 64, [&](Point p, double s) { return std::cos(k * p[0]) * (a + s * (b + s * (cc + s * d))); });
    auto g = K.convolve(F);
    const double mu = 1.0 - k * k;
    auto exact = [&](double t) {
      // Repeated integration by parts for a cubic times an exponential.
      auto P = [&](double s) { return a + s * (b + s * (cc + s * d)); };
      auto P1 = [&](double s) { return b + s * (2 * cc + s * 3 * d); };
      auto P2 = [&](double s) { return 2 * cc + 6 * d * s; };
      const double P3 = 6 * d;
      if (mu == 0.0) return a * t + b * t * t / 2 + cc * t * t * t / 3 + d * t * t * t * t / 4;
      auto prim = [&](double s) {
        return -(P(s) / mu + P1(s) / (mu * mu) + P2(s) / (mu * mu * mu) + P3 / (mu * mu * mu * mu));
      };
      return prim(t) - std::exp(mu * t) * prim(0.0);
    };
    for (std::size_t j : {1u, 17u, 64u}) {
      const double t = F.times()[j];
      CHECK(std::abs(g.slice(j)[0] - exact(t)) < 1e-8 * std::max(1.0, std::abs(exact(t))));
    }
  }
}

TEST_CASE("linearity and PDE residual") {
  auto c = unit_circle();
  DuhamelOperator K(KernelEvaluator::schrodinger(c));
  auto f1 = field(c, 0.1, 128, [](Point p, double s) { return std::sin(p[0]) * (1 + s); });
  auto f2 = field(c, 0.1, 128, [](Point p, double s) { return std::cos(4 * p[0]) - s * s; });
  auto lhs = K.convolve(2.0 * f1 + (-3.0) * f2);
  auto rhs = 2.0 * K.convolve(f1) + (-3.0) * K.convolve(f2);
  CHECK(max_abs_diff(lhs, rhs) < 1e-13);

  // u = P f0 + D F solves u_t = u_xx + u + F.
  std::vector<double> f0(64);
  for (int i = 0; i < 64; ++i) f0[i] = 0.1 * std::cos(2 * 2 * pi * i / 64);
  auto u = K.propagate_initial(GraphFunction(c, f0), f1) + K.convolve(f1);
  double worst = 0.0;
  for (std::size_t j = 2; j + 2 < u.time_count(); j += 5) {
    const double h = u.times()[j + 1] - u.times()[j];
    const auto um2 = u.slice(j - 2), um1 = u.slice(j - 1), up1 = u.slice(j + 1), up2 = u.slice(j + 2);
    std::vector<double> ut(64);
    for (int i = 0; i < 64; ++i) ut[i] = (um2[i] - 8 * um1[i] + 8 * up1[i] - up2[i]) / (12 * h);
    auto coeffs = c.analyze(u.slice(j));
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] *= c.laplacian_eigenvalue(k);
    const auto lap = c.synthesize(coeffs);
    for (int i = 0; i < 64; ++i) worst = std::max(worst, std::abs(ut[i] - lap[i] - u.slice(j)[i] - f1.slice(j)[i]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("physical-space cross-check") {
  auto c = unit_circle();
  DuhamelOperator K(KernelEvaluator::schrodinger(c));
  const std::vector<std::size_t> pts{0, 5, 21, 40};
  auto one = field(c, 0.1, 64, [](Point, double) { return 1.0; });
  CHECK(duhamel_physical_check(K, one, pts).max_rel < 1e-6);
  auto F = field(c, 0.1, 64, [](Point p, double s) { return std::cos(2 * p[0]) * s; });
  auto check = duhamel_physical_check(K, F, pts);
  CHECK(check.max_rel < 1e-6);
  // Closed form at t = 0.1, mu = -3: int_0^t e^{-3(t-s)} s ds.
  const double mu = -3.0, t = 0.1;
  const double exact = (std::exp(mu * t) - 1.0 - mu * t) / (mu * mu);
  CHECK(check.spectral[0] == doctest::Approx(exact).epsilon(1e-10));
  auto zero = duhamel_physical_check(K, one.zeros_like(), pts);
  CHECK(zero.max_abs == 0.0);

  EvolvingGeometry ev(c, 0.3);
  DuhamelOperator Kt(KernelEvaluator::evolving_schrodinger(ev));
  auto Fe = field(c, 0.2, 64, [](Point p, double s) { return std::sin(p[0]) + s; }, ev);
  CHECK(duhamel_physical_check(Kt, Fe, pts).max_rel < 1e-6);

  DuhamelOperator S(KernelEvaluator::heat(make_base(BaseKind::Sphere, 2, 1.0, 32)));
  auto Fs = field(S.kernel().geometry(), 0.1, 64, [](Point, double) { return 1.0; });
  CHECK_THROWS_AS(duhamel_physical_check(S, Fs, {0}), UnsupportedError);
}

TEST_CASE("operator norm probe") {
  auto c = unit_circle();
  DuhamelOperator K(KernelEvaluator::schrodinger(c));
  ProbeOptions opts{.horizon = 0.05, .time_steps = 64};
  auto first = operator_norm_probe(K, 1, 7, opts);
  // Q = 1: xt_norm of (e^t - 1) over yt_norm of 1.
  auto u = field(c, 0.05, 64, [](Point, double t) { return std::exp(t) - 1.0; });
  auto q = field(c, 0.05, 64, [](Point, double) { return 1.0; });
  CHECK(first.C_fit == doctest::Approx(xt_norm(u, 0.05, opts.norms).value / yt_norm(q, 0.05, opts.norms).value));
  CHECK(std::isfinite(first.C_fit));

  auto r8 = operator_norm_probe(K, 8, 7, opts), r16 = operator_norm_probe(K, 16, 7, opts);
  for (double r : r16.ratios) CHECK(std::isfinite(r));
  CHECK(r16.C_fit >= r8.C_fit);
  CHECK(r16.C_fit <= 1.1 * r8.C_fit);
  // Same seed, same answer.
  CHECK(operator_norm_probe(K, 8, 7, opts).C_fit == r8.C_fit);

  // Homogeneity.
  auto Q = random_probe_field(c, std::nullopt, opts, 3);
  const double base = xt_norm(K.convolve(Q), 0.05, opts.norms).value / yt_norm(Q, 0.05, opts.norms).value;
  auto Q5 = -5.0 * Q;
  CHECK(xt_norm(K.convolve(Q5), 0.05, opts.norms).value / yt_norm(Q5, 0.05, opts.norms).value ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("gradient growth under the evolving kernel") {
  // |grad P f0|_inf <= e^{C kappa^2 t} |grad f0|_inf, kappa^2 = 1/R0^2.
  auto c = unit_circle(128);
  EvolvingGeometry ev(c, 0.45);
  DuhamelOperator Kt(KernelEvaluator::evolving_schrodinger(ev));
  double fitted = 0.0;
  for (int seed = 0; seed < 6; ++seed) {
    std::vector<double> f0(128);
    for (int i = 0; i < 128; ++i) {
      const double th = 2 * pi * i / 128;
      f0[i] = 0.01 * (std::cos((seed + 1) * th) + 0.5 * std::sin((2 * seed + 3) * th + seed));
    }
    const auto j0 = c.jet(f0, 1.0);
    double g0 = 0.0;
    for (std::size_t i = 0; i < 128; ++i) g0 = std::max(g0, j0.grad_norm(i));
    for (double t : {0.05, 0.15, 0.3, 0.4}) {
      auto ft = Kt.propagate_initial(GraphFunction(c, f0), t);
      const auto jt = c.jet(ft.values(), ev.radius(t));
      double gt = 0.0;
      for (std::size_t i = 0; i < 128; ++i) gt = std::max(gt, jt.grad_norm(i));
      fitted = std::max(fitted, std::log(gt / g0) / t);
    }
  }
  CHECK(fitted <= 10.0);
}
