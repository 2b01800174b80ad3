#include "mcf/graph_calculus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mcf/errors.hpp"
#include "mcf/parabolic_norms.hpp"

namespace mcf {

namespace {

using Mat2 = std::array<double, 4>;  // row-major 2x2

struct Pointwise {
  std::vector<double> speed;  // -w H
  std::vector<double> w, v, H, A2;
};

double trace_sq(const Mat2& ginv, const Mat2& h, int n) {
  if (n == 1) {
    const double s = ginv[0] * h[0];
    return s * s;
  }
  // S = g^{-1} h; |A|^2 = tr(S S).
  const Mat2 S = {ginv[0] * h[0] + ginv[1] * h[2], ginv[0] * h[1] + ginv[1] * h[3],
                  ginv[2] * h[0] + ginv[3] * h[2], ginv[2] * h[1] + ginv[3] * h[3]};
  return S[0] * S[0] + 2.0 * S[1] * S[2] + S[3] * S[3];
}

Mat2 inverse(const Mat2& g, int n) {
  if (n == 1) return {1.0 / g[0], 0.0, 0.0, 0.0};
  const double det = g[0] * g[3] - g[1] * g[2];
  return {g[3] / det, -g[1] / det, -g[2] / det, g[0] / det};
}

Pointwise evaluate(const GraphFunction& u) {
  const BaseGeometry& geom = u.geometry();
  const int n = geom.dimension();
  const std::size_t np = u.size();
  Pointwise out;
  out.speed.resize(np);
  out.w.resize(np);
  out.v.resize(np);
  out.H.resize(np);
  out.A2.resize(np);

  if (geom.is_round()) {
    const double rho = u.base_radius();
    const FieldJet j = geom.jet(u.values(), 1.0);  // angular derivatives
    for (std::size_t i = 0; i < np; ++i) {
      const double r = rho + j.value[i];
      if (!(r > 0.0)) {
        std::ostringstream msg;
        msg << "graph over the " << to_string(geom.kind()) << " reaches the origin (r = " << r << " at grid point "
            << i << ")";
        throw GraphValidityError(msg.str());
      }
      const double a1 = j.grad[0][i], a2 = n == 2 ? j.grad[1][i] : 0.0;
      const double b11 = j.hess[0][i], b12 = n == 2 ? j.hess[1][i] : 0.0, b22 = n == 2 ? j.hess[2][i] : 0.0;
      const double aa = a1 * a1 + a2 * a2;
      const double trb = b11 + b22;
      const double aba = a1 * a1 * b11 + 2.0 * a1 * a2 * b12 + a2 * a2 * b22;
      // Log-radius form; exact for constant shifts so Q(0) = 0 to round-off.
      const double r2 = r * r;
      const double grad_phi2 = aa / r2;
      const double lap_phi = trb / r - aa / r2;
      const double hess_phi_aa = aba / (r2 * r) - aa * aa / (r2 * r2);
      const double S = lap_phi - hess_phi_aa / (1.0 + grad_phi2);
      out.speed[i] = -(n - S) / r;
      const double root = std::sqrt(r2 + aa);
      out.w[i] = root / r;
      out.v[i] = std::pow(r, n - 1) * root / std::pow(rho, n);
      out.H[i] = (n - S) / (r * out.w[i]);

      const Mat2 g = {r2 + a1 * a1, a1 * a2, a1 * a2, r2 + a2 * a2};
      const Mat2 h = {(r2 + 2.0 * a1 * a1 - r * b11) / root, (2.0 * a1 * a2 - r * b12) / root,
                      (2.0 * a1 * a2 - r * b12) / root, (r2 + 2.0 * a2 * a2 - r * b22) / root};
      out.A2[i] = trace_sq(inverse(g, n), h, n);
    }
    return out;
  }

  const FieldJet j = geom.jet(u.values());
  for (std::size_t i = 0; i < np; ++i) {
    const double g1 = j.grad[0][i], g2 = n == 2 ? j.grad[1][i] : 0.0;
    const double h11 = j.hess[0][i], h12 = n == 2 ? j.hess[1][i] : 0.0, h22 = n == 2 ? j.hess[2][i] : 0.0;
    const double gg = g1 * g1 + g2 * g2;
    const double W2 = 1.0 + gg;
    const double W = std::sqrt(W2);
    const double ghg = g1 * g1 * h11 + 2.0 * g1 * g2 * h12 + g2 * g2 * h22;
    out.speed[i] = h11 + h22 - ghg / W2;
    out.w[i] = W;
    out.v[i] = W;
    out.H[i] = -out.speed[i] / W;
    const Mat2 g = {1.0 + g1 * g1, g1 * g2, g1 * g2, 1.0 + g2 * g2};
    const Mat2 h = {-h11 / W, -h12 / W, -h12 / W, -h22 / W};
    out.A2[i] = trace_sq(inverse(g, n), h, n);
  }
  return out;
}

void require_small(const GraphFunction& u) {
  const double norm = c01_norm(u);
  const double delta = graph_validity_threshold(u.geometry(), u.base_radius());
  if (!(norm < delta)) {
    std::ostringstream msg;
    msg << "nonlinearity Q: ||u||_{C^{0,1}} = " << norm << " exceeds the smallness threshold " << delta
        << " under which the quadratic estimates hold";
    throw GraphValidityError(msg.str());
  }
}

}  // namespace

double graph_validity_threshold(const BaseGeometry& geom, double rho) {
  if (geom.is_round()) return 0.3 * rho;
  return geom.graph_validity_threshold();
}

std::vector<double> area_element_v(const GraphFunction& u) { return evaluate(u).v; }
std::vector<double> speed_w(const GraphFunction& u) { return evaluate(u).w; }
std::vector<double> mean_curvature_graph(const GraphFunction& u) { return evaluate(u).H; }
std::vector<double> normal_speed(const GraphFunction& u) { return evaluate(u).speed; }
std::vector<double> second_fundamental_form_norm2(const GraphFunction& u) { return evaluate(u).A2; }

std::vector<double> linearized_L(const GraphFunction& u) {
  const BaseGeometry& geom = u.geometry();
  const double rho = u.base_radius();
  const FieldJet j = geom.jet(u.values(), rho);
  const double a2 = geom.is_round() ? geom.dimension() / (rho * rho) : 0.0;
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = j.laplacian(i) + a2 * u[i];
  return out;
}

std::vector<double> nonlinearity_Q(const GraphFunction& u) {
  require_small(u);
  const BaseGeometry& geom = u.geometry();
  const double rho = u.base_radius();
  const double H0 = geom.is_round() ? geom.dimension() / rho : 0.0;
  std::vector<double> q = normal_speed(u);
  const std::vector<double> L = linearized_L(u);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = q[i] + H0 - L[i];
  return q;
}

std::vector<double> nonlinearity_Q_t(const GraphFunction& u, const EvolvingGeometry& evolving, double t) {
  if (u.geometry().kind() != evolving.base().kind())
    throw std::invalid_argument("nonlinearity_Q_t: graph and evolving base differ");
  const double R = evolving.radius(t);
  const auto v = u.values();
  return nonlinearity_Q(GraphFunction(u.geometry(), {v.begin(), v.end()}, R, t));
}

QuadraticBoundReport check_quadratic_bounds(const GraphFunction& u, const GraphFunction& v, double C) {
  if (u.size() != v.size() || u.base_radius() != v.base_radius())
    throw std::invalid_argument("check_quadratic_bounds: u and v must live on the same base");
  const BaseGeometry& geom = u.geometry();
  const double rho = u.base_radius();
  const auto qu = nonlinearity_Q(u);
  const auto qv = nonlinearity_Q(v);
  std::vector<double> diff(u.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u[i] - v[i];
  const FieldJet ju = geom.jet(u.values(), rho);
  const FieldJet jd = geom.jet(diff, rho);
  const double cu = c01_norm(u), cv = c01_norm(v);

  // Ratios of order round-off over an exactly vanishing bound are not
  // meaningful; they are attributed to the floor below.
  constexpr double floor = 1e-13;
  auto ratio = [](double num, double den) {
    if (num <= floor) return 0.0;
    return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
  };
  QuadraticBoundReport rep;
  rep.C = C;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]), g = ju.grad_norm(i), h = ju.hess_norm(i);
    const double single = a * a + g * g + h * (g + a);
    rep.fitted_single = std::max(rep.fitted_single, ratio(std::abs(qu[i]), single));
    const double da = std::abs(diff[i]), dg = jd.grad_norm(i), dh = jd.hess_norm(i);
    const double pair = (cu + cv) * (da + dg + dh) + (dg + da) * h;
    rep.fitted_difference = std::max(rep.fitted_difference, ratio(std::abs(qu[i] - qv[i]), pair));
  }
  rep.pass_single = rep.fitted_single <= C;
  rep.pass_difference = rep.fitted_difference <= C;
  return rep;
}

}  // namespace mcf
