#include "mcf/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "mcf/errors.hpp"
#include "mcf/graph_calculus.hpp"

namespace mcf {

std::string to_string(ExactKind kind) {
  switch (kind) {
    case ExactKind::ShrinkingCircle: return "ShrinkingCircle";
    case ExactKind::ShrinkingSphere: return "ShrinkingSphere";
    case ExactKind::StaticFlat: return "StaticFlat";
    case ExactKind::ConcentricDifference: return "ConcentricDifference";
  }
  return "?";
}

ExactKind exact_kind_from_string(const std::string& name) {
  for (ExactKind k : {ExactKind::ShrinkingCircle, ExactKind::ShrinkingSphere, ExactKind::StaticFlat,
                      ExactKind::ConcentricDifference})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown exact solution '" + name + "'");
}

int ExactSolution::space_dimension() const {
  switch (kind) {
    case ExactKind::ShrinkingCircle: return 1;
    case ExactKind::ShrinkingSphere: return 2;
    default: return dimension;
  }
}

double ExactSolution::extinction_time() const {
  const int n = space_dimension();
  switch (kind) {
    case ExactKind::StaticFlat: return std::numeric_limits<double>::infinity();
    case ExactKind::ConcentricDifference: return std::min(R0, R0_prime) * std::min(R0, R0_prime) / (2.0 * n);
    default: return R0 * R0 / (2.0 * n);
  }
}

namespace {

void check_time(const ExactSolution& s, double t) {
  if (!(s.R0 > 0.0) || (s.kind == ExactKind::ConcentricDifference && !(s.R0_prime > 0.0)))
    throw std::invalid_argument("exact solution: radii must be positive");
  if (s.space_dimension() < 1 || s.space_dimension() > 2)
    throw std::invalid_argument("exact solution: dimension must be 1 or 2");
  if (t < 0.0 || !(t < s.extinction_time())) {
    std::ostringstream msg;
    msg << to_string(s.kind) << ": t = " << t << " outside [0, " << s.extinction_time() << ")";
    throw DomainError(msg.str());
  }
}

double radius_at(double R, int n, double t) { return std::sqrt(R * R - 2.0 * n * t); }

}  // namespace

double exact_eval(const ExactSolution& s, const Point&, double t) {
  check_time(s, t);
  const int n = s.space_dimension();
  switch (s.kind) {
    case ExactKind::StaticFlat: return 0.0;
    case ExactKind::ConcentricDifference: return radius_at(s.R0_prime, n, t) - radius_at(s.R0, n, t);
    default: return radius_at(s.R0, n, t) - s.R0;
  }
}

double exact_time_derivative(const ExactSolution& s, const Point&, double t) {
  check_time(s, t);
  const int n = s.space_dimension();
  switch (s.kind) {
    case ExactKind::StaticFlat: return 0.0;
    case ExactKind::ConcentricDifference: return -n / radius_at(s.R0_prime, n, t) + n / radius_at(s.R0, n, t);
    default: return -n / radius_at(s.R0, n, t);
  }
}

SpaceTimeField exact_field(const ExactSolution& s, const BaseGeometry& geom, std::vector<double> times) {
  const bool flat = s.kind == ExactKind::StaticFlat;
  if (flat == geom.is_round() || geom.dimension() != s.space_dimension())
    throw std::invalid_argument("exact_field: " + to_string(s.kind) + " does not live on a " + to_string(geom.kind()));
  if (!flat && std::abs(geom.scale() - s.R0) > 1e-14 * s.R0)
    throw std::invalid_argument("exact_field: base radius must equal R0");
  if (times.empty()) throw std::invalid_argument("exact_field: empty time grid");
  std::optional<EvolvingGeometry> ev;
  if (s.over_evolving_base()) ev.emplace(geom, times.back());
  SpaceTimeField u(geom, std::move(times), ev);
  for (std::size_t j = 0; j < u.time_count(); ++j) {
    auto slice = u.slice(j);
    for (std::size_t i = 0; i < slice.size(); ++i) slice[i] = exact_eval(s, geom.point(i), u.times()[j]);
  }
  return u;
}

std::vector<double> oracle_velocity(const GraphFunction& u) {
  const BaseGeometry& geom = u.geometry();
  const std::size_t np = u.size();
  std::vector<double> out(np);
  auto invalid = [&](std::size_t i) {
    std::ostringstream msg;
    msg << "graph is not valid at grid point " << i;
    throw GraphValidityError(msg.str());
  };

  if (geom.kind() == BaseKind::Circle) {
    const FieldJet j = geom.jet(u.values(), 1.0);
    for (std::size_t i = 0; i < np; ++i) {
      const double r = u.base_radius() + j.value[i], r1 = j.grad[0][i], r2 = j.hess[0][i];
      if (!(r > 0.0)) invalid(i);
      out[i] = -(r * r + 2.0 * r1 * r1 - r * r2) / (r * (r * r + r1 * r1));
    }
    return out;
  }

  if (geom.kind() == BaseKind::Sphere) {
    // X = r omega; g_ij = r^2 delta_ij + r_i r_j and
    // h_ij = (r^2 delta_ij + 2 r_i r_j - r r_ij) / sqrt(r^2 + |Dr|^2) in a unit-sphere frame.
    const FieldJet j = geom.jet(u.values(), 1.0);
    for (std::size_t i = 0; i < np; ++i) {
      const double r = u.base_radius() + j.value[i];
      if (!(r > 0.0)) invalid(i);
      const double a = j.grad[0][i], b = j.grad[1][i];
      const double g11 = r * r + a * a, g12 = a * b, g22 = r * r + b * b;
      const double det = g11 * g22 - g12 * g12;
      const double root = std::sqrt(r * r + a * a + b * b);
      const double h11 = (r * r + 2 * a * a - r * j.hess[0][i]) / root;
      const double h12 = (2 * a * b - r * j.hess[1][i]) / root;
      const double h22 = (r * r + 2 * b * b - r * j.hess[2][i]) / root;
      const double H = (g22 * h11 - 2 * g12 * h12 + g11 * h22) / det;
      out[i] = -H * root / r;
    }
    return out;
  }

  // Flat tori: u_t = W div(Du / W).
  const FieldJet j = geom.jet(u.values());
  const int n = geom.dimension();
  std::vector<double> W(np);
  std::array<std::vector<double>, 2> flux;
  for (int a = 0; a < n; ++a) flux[a].resize(np);
  for (std::size_t i = 0; i < np; ++i) {
    double gg = 0.0;
    for (int a = 0; a < n; ++a) gg += j.grad[a][i] * j.grad[a][i];
    W[i] = std::sqrt(1.0 + gg);
    if (!std::isfinite(W[i])) invalid(i);
    for (int a = 0; a < n; ++a) flux[a][i] = j.grad[a][i] / W[i];
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int a = 0; a < n; ++a) {
    const FieldJet fa = geom.jet(flux[a]);
    for (std::size_t i = 0; i < np; ++i) out[i] += fa.grad[a][i];
  }
  for (std::size_t i = 0; i < np; ++i) out[i] *= W[i];
  return out;
}

SpaceTimeField fd_solve(const BaseGeometry& geom, const GraphFunction& u0, double horizon, int steps,
                        int output_steps) {
  if (!(horizon > 0.0)) throw std::invalid_argument("fd_solve: horizon must be positive");
  if (steps < 1) throw std::invalid_argument("fd_solve: steps must be positive");
  if (output_steps == 0) output_steps = steps;
  if (output_steps < 1 || steps % output_steps != 0)
    throw std::invalid_argument("fd_solve: steps must be a multiple of output_steps");
  if (u0.size() != geom.point_count() || u0.geometry().kind() != geom.kind())
    throw std::invalid_argument("fd_solve: initial data lives on a different grid");
  if (geom.is_round() && std::abs(u0.base_radius() - geom.scale()) > 1e-14 * geom.scale())
    throw std::invalid_argument("fd_solve: initial data must be a graph over the static base");

  const double rho = geom.scale();
  const double dt = horizon / steps;
  const std::size_t nc = geom.coefficient_count();
  std::vector<double> lambda(nc);
  for (std::size_t k = 0; k < nc; ++k) lambda[k] = geom.laplacian_eigenvalue(k) + geom.a_squared();

  SpaceTimeField out(geom, uniform_times(horizon, output_steps));
  const int stride = steps / output_steps;

  std::vector<double> values(u0.values().begin(), u0.values().end());
  std::vector<double> coeffs = geom.analyze(values);
  // Start from the projection so that slices are consistent with the spectral state.
  values = geom.synthesize(coeffs);
  std::copy(values.begin(), values.end(), out.slice(0).begin());

  auto explicit_part = [&](const std::vector<double>& v, const std::vector<double>& c, double t) {
    std::vector<double> speed;
    try {
      speed = oracle_velocity(GraphFunction(geom, v, rho, t));
    } catch (const GraphValidityError& e) {
      std::ostringstream msg;
      msg << "fd_solve: graph validity lost at t = " << t << " (" << e.what() << ")";
      throw GraphValidityError(msg.str());
    }
    std::vector<double> n = geom.analyze(speed);
    for (std::size_t k = 0; k < nc; ++k) n[k] -= lambda[k] * c[k];
    return n;
  };

  std::vector<double> prev_n;
  for (int m = 0; m < steps; ++m) {
    const double t = m * dt;
    std::vector<double> n = explicit_part(values, coeffs, t);
    if (m == 0) {
      for (std::size_t k = 0; k < nc; ++k) coeffs[k] = (coeffs[k] + dt * n[k]) / (1.0 - dt * lambda[k]);
    } else {
      for (std::size_t k = 0; k < nc; ++k)
        coeffs[k] = ((1.0 + 0.5 * dt * lambda[k]) * coeffs[k] + dt * (1.5 * n[k] - 0.5 * prev_n[k])) /
                    (1.0 - 0.5 * dt * lambda[k]);
    }
    prev_n = std::move(n);
    values = geom.synthesize(coeffs);
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!std::isfinite(values[i]) || (geom.is_round() && !(rho + values[i] > 0.0))) {
        std::ostringstream msg;
        msg << "fd_solve: graph validity lost at t = " << (m + 1) * dt << " (grid point " << i << ")";
        throw GraphValidityError(msg.str());
      }
    if ((m + 1) % stride == 0) {
      const auto s = out.slice(static_cast<std::size_t>((m + 1) / stride));
      std::copy(values.begin(), values.end(), s.begin());
    }
  }
  return out;
}

CurvatureHistory curvature_history(const SpaceTimeField& u) {
  const BaseGeometry& geom = u.geometry();
  CurvatureHistory h;
  h.times.assign(u.times().begin(), u.times().end());
  const bool one_d = geom.dimension() == 1;
  for (std::size_t j = 0; j < u.time_count(); ++j) {
    const auto slice = u.slice(j);
    const std::size_t np = slice.size();
    std::vector<double> A(np);
    double supA = 0.0;
    if (one_d) {
      // Signed curvature and arc-length element, then d kappa / ds.
      const FieldJet jt = geom.jet(slice, 1.0);
      std::vector<double> kappa(np), ds(np);
      const bool round = geom.is_round();
      const double rho = round ? u.base_radius(j) : 0.0;
      for (std::size_t i = 0; i < np; ++i) {
        const double p = jt.grad[0][i], q = jt.hess[0][i];
        if (round) {
          const double r = rho + jt.value[i];
          ds[i] = std::sqrt(r * r + p * p);
          kappa[i] = (r * r + 2 * p * p - r * q) / (ds[i] * ds[i] * ds[i]);
        } else {
          ds[i] = std::sqrt(1.0 + p * p);
          kappa[i] = q / (ds[i] * ds[i] * ds[i]);
        }
        A[i] = std::abs(kappa[i]);
        supA = std::max(supA, A[i]);
      }
      const FieldJet jk = geom.jet(kappa, 1.0);
      std::vector<double> dA(np);
      double supD = 0.0;
      for (std::size_t i = 0; i < np; ++i) {
        dA[i] = std::abs(jk.grad[0][i]) / ds[i];
        supD = std::max(supD, dA[i]);
      }
      h.grad_A.push_back(std::move(dA));
      h.sup_grad_A.push_back(supD);
    } else {
      const auto a2 = second_fundamental_form_norm2(u.graph(j));
      for (std::size_t i = 0; i < np; ++i) {
        A[i] = std::sqrt(a2[i]);
        supA = std::max(supA, A[i]);
      }
    }
    h.A.push_back(std::move(A));
    h.sup_A.push_back(supA);
  }
  return h;
}

CurvatureEstimate curvature_estimates(const CurvatureHistory& h) {
  if (h.times.empty()) throw std::invalid_argument("curvature_estimates: empty history");
  CurvatureEstimate e;
  e.kappa0 = h.sup_A.front();
  e.sup_A = *std::max_element(h.sup_A.begin(), h.sup_A.end());
  e.ratio = e.sup_A / e.kappa0;
  if (!h.has_gradient()) {
    e.C1 = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double c = 0.0;
  for (std::size_t j = 0; j < h.times.size(); ++j) {
    const double t = h.times[j];
    if (t <= 0.0) continue;
    c = std::max(c, h.sup_grad_A[j] * h.sup_grad_A[j] / (e.kappa0 * e.kappa0 * (1.0 + 1.0 / t)));
  }
  e.C1 = c;
  return e;
}

}  // namespace mcf
