#include "mcf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <stdexcept>

#include "fft.hpp"
#include "mcf/errors.hpp"
#include "mcf/quadrature.hpp"

namespace mcf {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

namespace detail {

struct GeometryData {
  BaseKind kind = BaseKind::Circle;
  int n = 1;
  double scale = 1.0;
  int N = 16;
  double wave = 1.0;  // d/dx of e^{ikx} is i*k*wave; 1 on round bases

  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<int> degree;
  std::vector<double> unit_eig;
  std::unique_ptr<RealFft> fft;

  // Sphere: Gauss-Legendre latitudes x Fourier longitudes, orthonormal
  // associated Legendre tables indexed [lat * lm_count + lm].
  int nlat = 0;
  int nlon = 0;
  int lmax = 0;
  std::vector<double> sin_t, cot_t;
  std::vector<double> gl_weight;
  std::vector<std::size_t> lm_start;
  std::size_t lm_count = 0;
  std::vector<double> P, dP, d2P;
};

}  // namespace detail

namespace {

using detail::GeometryData;

void build_legendre_tables(GeometryData& d, const GaussRule& rule) {
  const int L = d.lmax;
  d.lm_start.assign(static_cast<std::size_t>(L) + 2, 0);
  for (int m = 0; m <= L; ++m) d.lm_start[m + 1] = d.lm_start[m] + static_cast<std::size_t>(L - m + 1);
  d.lm_count = d.lm_start[L + 1];
  const std::size_t total = d.lm_count * static_cast<std::size_t>(d.nlat);
  d.P.assign(total, 0.0);
  d.dP.assign(total, 0.0);
  d.d2P.assign(total, 0.0);

  for (int i = 0; i < d.nlat; ++i) {
    const double x = rule.nodes[i];
    const double s = std::sqrt((1.0 - x) * (1.0 + x));
    double* P = &d.P[static_cast<std::size_t>(i) * d.lm_count];
    double* dP = &d.dP[static_cast<std::size_t>(i) * d.lm_count];
    double* d2P = &d.d2P[static_cast<std::size_t>(i) * d.lm_count];
    double pmm = 1.0 / std::sqrt(2.0);
    for (int m = 0; m <= L; ++m) {
      if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
      const std::size_t base = d.lm_start[m];
      P[base] = pmm;
      if (m + 1 <= L) P[base + 1] = std::sqrt(2.0 * m + 3.0) * x * pmm;
      for (int l = m + 2; l <= L; ++l) {
        const double ll = l, mm = m;
        const double a = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - mm * mm));
        const double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - mm * mm) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
        P[base + (l - m)] = a * (x * P[base + (l - m - 1)] - b * P[base + (l - m - 2)]);
      }
      for (int l = m; l <= L; ++l) {
        const double ll = l, mm = m;
        const double prev = l > m ? P[base + (l - m - 1)] : 0.0;
        const double c = l > m ? std::sqrt((2.0 * ll + 1.0) / (2.0 * ll - 1.0) * (ll - mm) * (ll + mm)) : 0.0;
        const double p = P[base + (l - m)];
        const double dp = (ll * x * p - c * prev) / s;
        dP[base + (l - m)] = dp;
        d2P[base + (l - m)] = -(x / s) * dp - (ll * (ll + 1.0) - mm * mm / (s * s)) * p;
      }
    }
  }
}

std::shared_ptr<GeometryData> build(BaseKind kind, int n, double scale, int N) {
  auto d = std::make_shared<GeometryData>();
  d->kind = kind;
  d->n = n;
  d->scale = scale;
  d->N = N;
  switch (kind) {
    case BaseKind::Circle:
    case BaseKind::PeriodicLine: {
      const bool circle = kind == BaseKind::Circle;
      d->wave = circle ? 1.0 : 2.0 * kPi / scale;
      d->fft = std::make_unique<detail::RealFft>(N, 1);
      const double h = circle ? 2.0 * kPi / N : scale / N;
      for (int i = 0; i < N; ++i) {
        d->points.push_back({h * i, 0.0});
        d->weights.push_back(circle ? scale * h : h);
      }
      for (int k = 0; k <= N / 2; ++k) {
        for (int part = 0; part < 2; ++part) {
          d->degree.push_back(k);
          d->unit_eig.push_back(-static_cast<double>(k) * k * d->wave * d->wave);
        }
      }
      break;
    }
    case BaseKind::PeriodicPlane: {
      d->wave = 2.0 * kPi / scale;
      d->fft = std::make_unique<detail::RealFft>(detail::RealFft::Square{}, N);
      const double h = scale / N;
      for (int ix = 0; ix < N; ++ix)
        for (int iy = 0; iy < N; ++iy) {
          d->points.push_back({h * ix, h * iy});
          d->weights.push_back(h * h);
        }
      const int nc = N / 2 + 1;
      for (int ix = 0; ix < N; ++ix) {
        const int kx = ix <= N / 2 ? ix : ix - N;
        for (int iy = 0; iy < nc; ++iy) {
          const double k2 = static_cast<double>(kx) * kx + static_cast<double>(iy) * iy;
          for (int part = 0; part < 2; ++part) {
            d->degree.push_back(std::max(std::abs(kx), iy));
            d->unit_eig.push_back(-k2 * d->wave * d->wave);
          }
        }
      }
      break;
    }
    case BaseKind::Sphere: {
      d->nlat = N / 2;
      d->nlon = N;
      d->lmax = d->nlat - 1;
      const GaussRule rule = gauss_legendre(static_cast<std::size_t>(d->nlat));
      d->fft = std::make_unique<detail::RealFft>(d->nlon, d->nlat);
      for (int i = 0; i < d->nlat; ++i) {
        const double x = rule.nodes[i];
        const double s = std::sqrt((1.0 - x) * (1.0 + x));
        d->sin_t.push_back(s);
        d->cot_t.push_back(x / s);
        d->gl_weight.push_back(rule.weights[i]);
        const double theta = std::acos(x);
        for (int j = 0; j < d->nlon; ++j) {
          d->points.push_back({theta, 2.0 * kPi * j / d->nlon});
          d->weights.push_back(rule.weights[i] * (2.0 * kPi / d->nlon) * scale * scale);
        }
      }
      build_legendre_tables(*d, rule);
      for (int m = 0; m <= d->lmax; ++m)
        for (int l = m; l <= d->lmax; ++l)
          for (int part = 0; part < 2; ++part) {
            d->degree.push_back(l);
            d->unit_eig.push_back(-static_cast<double>(l) * (l + 1));
          }
      break;
    }
  }
  return d;
}

// Spectral multipliers for one derivative pattern on 1-D and planar grids.
struct Multiplier {
  int dx = 0;  // derivative order in the first coordinate
  int dy = 0;  // derivative order in the second coordinate
};

cplx multiplier_1d(int k, int N, double wave, int order) {
  if (order == 0) return 1.0;
  if (order == 1) return k == N / 2 ? cplx(0.0) : cplx(0.0, k * wave);
  return -static_cast<double>(k) * k * wave * wave;
}

cplx multiplier_axis(int k, bool nyquist, double wave, int order) {
  if (order == 0) return 1.0;
  if (order == 1) return nyquist ? cplx(0.0) : cplx(0.0, k * wave);
  return -static_cast<double>(k) * k * wave * wave;
}

std::vector<double> sphere_synthesis(const GeometryData& d, std::span<const double> coeffs, int theta_order,
                                     int phi_order) {
  const std::size_t nc = static_cast<std::size_t>(d.nlon / 2 + 1);
  std::vector<cplx> rows(nc * d.nlat, cplx(0.0));
  const std::vector<double>& table = theta_order == 0 ? d.P : (theta_order == 1 ? d.dP : d.d2P);
  for (int i = 0; i < d.nlat; ++i) {
    const double* T = &table[static_cast<std::size_t>(i) * d.lm_count];
    for (int m = 0; m <= d.lmax; ++m) {
      cplx acc = 0.0;
      const std::size_t base = d.lm_start[m];
      for (int l = m; l <= d.lmax; ++l) {
        const std::size_t q = base + (l - m);
        acc += T[q] * cplx(coeffs[2 * q], coeffs[2 * q + 1]);
      }
      if (phi_order == 1) acc *= cplx(0.0, m);
      if (phi_order == 2) acc *= -static_cast<double>(m) * m;
      rows[static_cast<std::size_t>(i) * nc + m] = acc;
    }
  }
  std::vector<double> out(d.points.size());
  d.fft->backward(rows.data(), out.data());
  return out;
}

}  // namespace

std::string to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::Circle:
      return "circle";
    case BaseKind::PeriodicLine:
      return "periodic_line";
    case BaseKind::PeriodicPlane:
      return "periodic_plane";
    case BaseKind::Sphere:
      return "sphere";
  }
  return "unknown";
}

BaseKind base_kind_from_string(const std::string& name) {
  if (name == "circle" || name == "Circle") return BaseKind::Circle;
  if (name == "periodic_line" || name == "line" || name == "PeriodicLine") return BaseKind::PeriodicLine;
  if (name == "periodic_plane" || name == "plane" || name == "PeriodicPlane") return BaseKind::PeriodicPlane;
  if (name == "sphere" || name == "Sphere") return BaseKind::Sphere;
  throw std::invalid_argument("unknown geometry kind '" + name + "'");
}

double FieldJet::grad_norm(std::size_t i) const {
  if (dimension == 1) return std::abs(grad[0][i]);
  return std::hypot(grad[0][i], grad[1][i]);
}

double FieldJet::hess_norm(std::size_t i) const {
  if (dimension == 1) return std::abs(hess[0][i]);
  const double a = hess[0][i], b = hess[1][i], c = hess[2][i];
  return std::sqrt(a * a + 2.0 * b * b + c * c);
}

double FieldJet::laplacian(std::size_t i) const {
  return dimension == 1 ? hess[0][i] : hess[0][i] + hess[2][i];
}

BaseKind BaseGeometry::kind() const noexcept { return data_->kind; }
int BaseGeometry::dimension() const noexcept { return data_->n; }
double BaseGeometry::scale() const noexcept { return data_->scale; }
int BaseGeometry::grid_size() const noexcept { return data_->N; }
bool BaseGeometry::is_round() const noexcept {
  return data_->kind == BaseKind::Circle || data_->kind == BaseKind::Sphere;
}

double BaseGeometry::a_squared() const noexcept {
  return is_round() ? data_->n / (data_->scale * data_->scale) : 0.0;
}
double BaseGeometry::mean_curvature() const noexcept { return is_round() ? data_->n / data_->scale : 0.0; }
double BaseGeometry::kappa() const noexcept { return std::sqrt(a_squared()); }

double BaseGeometry::injectivity_radius() const noexcept {
  return is_round() ? kPi * data_->scale : 0.5 * data_->scale;
}

double BaseGeometry::graph_validity_threshold() const noexcept {
  return 0.3 * (is_round() ? data_->scale : data_->scale / (2.0 * kPi));
}

double BaseGeometry::grid_spacing() const noexcept {
  const auto& d = *data_;
  switch (d.kind) {
    case BaseKind::Circle:
      return 2.0 * kPi * d.scale / d.N;
    case BaseKind::PeriodicLine:
    case BaseKind::PeriodicPlane:
      return d.scale / d.N;
    case BaseKind::Sphere: {
      double dlat = 0.0;
      for (int i = 0; i + 1 < d.nlat; ++i)
        dlat = std::max(dlat, std::abs(d.points[i * d.nlon][0] - d.points[(i + 1) * d.nlon][0]));
      return d.scale * std::max(dlat, 2.0 * kPi / d.nlon);
    }
  }
  return 0.0;
}

std::size_t BaseGeometry::point_count() const noexcept { return data_->points.size(); }
Point BaseGeometry::point(std::size_t i) const { return data_->points.at(i); }
std::span<const double> BaseGeometry::weights() const noexcept { return data_->weights; }

double BaseGeometry::total_volume() const noexcept {
  const auto& d = *data_;
  switch (d.kind) {
    case BaseKind::Circle:
      return 2.0 * kPi * d.scale;
    case BaseKind::PeriodicLine:
      return d.scale;
    case BaseKind::PeriodicPlane:
      return d.scale * d.scale;
    case BaseKind::Sphere:
      return 4.0 * kPi * d.scale * d.scale;
  }
  return 0.0;
}

std::size_t BaseGeometry::coefficient_count() const noexcept { return data_->degree.size(); }
int BaseGeometry::degree(std::size_t j) const { return data_->degree.at(j); }
double BaseGeometry::unit_eigenvalue(std::size_t j) const { return data_->unit_eig.at(j); }

double BaseGeometry::laplacian_eigenvalue(std::size_t j) const {
  const double e = data_->unit_eig.at(j);
  return is_round() ? e / (data_->scale * data_->scale) : e;
}

std::vector<double> BaseGeometry::eigenvalues() const {
  std::set<double, std::greater<>> distinct;
  for (std::size_t j = 0; j < coefficient_count(); ++j) distinct.insert(laplacian_eigenvalue(j));
  return {distinct.begin(), distinct.end()};
}

std::vector<double> BaseGeometry::analyze(std::span<const double> values) const {
  const auto& d = *data_;
  if (values.size() != d.points.size()) throw std::invalid_argument("analyze: field size mismatch");
  std::vector<cplx> spectrum(d.fft->complex_size());
  d.fft->forward(values.data(), spectrum.data());
  std::vector<double> out(coefficient_count(), 0.0);
  if (d.kind != BaseKind::Sphere) {
    const double norm = 1.0 / static_cast<double>(d.points.size());
    for (std::size_t c = 0; c < spectrum.size(); ++c) {
      out[2 * c] = spectrum[c].real() * norm;
      out[2 * c + 1] = spectrum[c].imag() * norm;
    }
    return out;
  }
  const std::size_t nc = static_cast<std::size_t>(d.nlon / 2 + 1);
  const double norm = 1.0 / d.nlon;
  for (int i = 0; i < d.nlat; ++i) {
    const double* P = &d.P[static_cast<std::size_t>(i) * d.lm_count];
    const double w = d.gl_weight[i] * norm;
    for (int m = 0; m <= d.lmax; ++m) {
      const cplx F = spectrum[static_cast<std::size_t>(i) * nc + m] * w;
      for (int l = m; l <= d.lmax; ++l) {
        const std::size_t q = d.lm_start[m] + (l - m);
        out[2 * q] += P[q] * F.real();
        out[2 * q + 1] += P[q] * F.imag();
      }
    }
  }
  return out;
}

std::vector<double> BaseGeometry::synthesize(std::span<const double> coefficients) const {
  const auto& d = *data_;
  if (coefficients.size() != coefficient_count())
    throw std::invalid_argument("synthesize: coefficient count mismatch");
  if (d.kind == BaseKind::Sphere) return sphere_synthesis(d, coefficients, 0, 0);
  std::vector<cplx> spectrum(d.fft->complex_size());
  for (std::size_t c = 0; c < spectrum.size(); ++c) spectrum[c] = cplx(coefficients[2 * c], coefficients[2 * c + 1]);
  std::vector<double> out(d.points.size());
  d.fft->backward(spectrum.data(), out.data());
  return out;
}

FieldJet BaseGeometry::jet(std::span<const double> values) const {
  return jet(values, is_round() ? data_->scale : 1.0);
}

FieldJet BaseGeometry::jet(std::span<const double> values, double radius) const {
  const auto& d = *data_;
  if (values.size() != d.points.size()) throw std::invalid_argument("jet: field size mismatch");
  if (!(radius > 0.0)) throw DomainError("jet: radius must be positive");
  FieldJet j;
  j.dimension = d.n;
  j.value.assign(values.begin(), values.end());
  const std::size_t np = d.points.size();
  const double r1 = d.kind == BaseKind::Circle || d.kind == BaseKind::Sphere ? 1.0 / radius : 1.0;
  const double r2 = r1 * r1;

  if (d.kind == BaseKind::Sphere) {
    const std::vector<double> c = analyze(values);
    const auto ut = sphere_synthesis(d, c, 1, 0);
    const auto up = sphere_synthesis(d, c, 0, 1);
    const auto utt = sphere_synthesis(d, c, 2, 0);
    const auto utp = sphere_synthesis(d, c, 1, 1);
    const auto upp = sphere_synthesis(d, c, 0, 2);
    for (auto& g : j.grad) g.resize(np);
    for (auto& h : j.hess) h.resize(np);
    for (int i = 0; i < d.nlat; ++i) {
      const double s = d.sin_t[i], ct = d.cot_t[i];
      for (int k = 0; k < d.nlon; ++k) {
        const std::size_t p = static_cast<std::size_t>(i) * d.nlon + k;
        j.grad[0][p] = ut[p] * r1;
        j.grad[1][p] = up[p] / s * r1;
        j.hess[0][p] = utt[p] * r2;
        j.hess[1][p] = (utp[p] - ct * up[p]) / s * r2;
        j.hess[2][p] = (upp[p] / (s * s) + ct * ut[p]) * r2;
      }
    }
    return j;
  }

  std::vector<cplx> spectrum(d.fft->complex_size());
  d.fft->forward(values.data(), spectrum.data());
  const double norm = 1.0 / static_cast<double>(np);
  for (auto& c : spectrum) c *= norm;
  auto apply = [&](auto&& mult) {
    std::vector<cplx> tmp(spectrum.size());
    for (std::size_t c = 0; c < spectrum.size(); ++c) tmp[c] = spectrum[c] * mult(c);
    std::vector<double> out(np);
    d.fft->backward(tmp.data(), out.data());
    return out;
  };

  if (d.n == 1) {
    j.grad[0] = apply([&](std::size_t k) { return multiplier_1d(static_cast<int>(k), d.N, d.wave, 1); });
    j.hess[0] = apply([&](std::size_t k) { return multiplier_1d(static_cast<int>(k), d.N, d.wave, 2); });
    for (auto& v : j.grad[0]) v *= r1;
    for (auto& v : j.hess[0]) v *= r2;
    return j;
  }

  const int nc = d.N / 2 + 1;
  auto axis = [&](std::size_t c, Multiplier mu) {
    const int ix = static_cast<int>(c) / nc;
    const int iy = static_cast<int>(c) % nc;
    const int kx = ix <= d.N / 2 ? ix : ix - d.N;
    return multiplier_axis(kx, ix == d.N / 2, d.wave, mu.dx) * multiplier_axis(iy, iy == d.N / 2, d.wave, mu.dy);
  };
  j.grad[0] = apply([&](std::size_t c) { return axis(c, {1, 0}); });
  j.grad[1] = apply([&](std::size_t c) { return axis(c, {0, 1}); });
  j.hess[0] = apply([&](std::size_t c) { return axis(c, {2, 0}); });
  j.hess[1] = apply([&](std::size_t c) { return axis(c, {1, 1}); });
  j.hess[2] = apply([&](std::size_t c) { return axis(c, {0, 2}); });
  return j;
}

std::vector<double> BaseGeometry::resample(std::span<const double> values, int count) const {
  const auto& d = *data_;
  if (d.n != 1) throw UnsupportedError("resample: only 1-D bases are supported");
  if (count < d.N || count % 2 != 0) throw std::invalid_argument("resample: count must be even and >= N");
  std::vector<cplx> spectrum(d.fft->complex_size());
  d.fft->forward(values.data(), spectrum.data());
  detail::RealFft fine(count, 1);
  std::vector<cplx> padded(fine.complex_size(), cplx(0.0));
  const double norm = 1.0 / d.N;
  for (int k = 0; k < d.N / 2; ++k) padded[k] = spectrum[k] * norm;
  // The coarse Nyquist mode is the cosine cos(N theta / 2).
  padded[d.N / 2] = 0.5 * spectrum[d.N / 2].real() * norm;
  if (count == d.N) padded[d.N / 2] *= 2.0;
  std::vector<double> out(static_cast<std::size_t>(count));
  fine.backward(padded.data(), out.data());
  return out;
}

BaseGeometry make_base(BaseKind kind, int dimension, double radius_or_period, int grid_size) {
  if (!(radius_or_period > 0.0) || !std::isfinite(radius_or_period))
    throw std::invalid_argument("make_base: radius/period must be positive");
  if (grid_size < 16 || grid_size % 2 != 0)
    throw std::invalid_argument("make_base: grid size must be even and at least 16");
  const int expected = (kind == BaseKind::Circle || kind == BaseKind::PeriodicLine) ? 1 : 2;
  if (dimension != expected)
    throw std::invalid_argument("make_base: " + to_string(kind) + " has dimension " + std::to_string(expected));
  BaseGeometry g;
  g.data_ = build(kind, dimension, radius_or_period, grid_size);
  return g;
}

namespace {
double wrap_periodic(double delta, double period) {
  double r = std::fmod(std::abs(delta), period);
  return std::min(r, period - r);
}
}  // namespace

double geodesic_distance(const BaseGeometry& geom, const Point& x, const Point& y) {
  switch (geom.kind()) {
    case BaseKind::Circle:
      return geom.scale() * wrap_periodic(x[0] - y[0], 2.0 * kPi);
    case BaseKind::PeriodicLine:
      return wrap_periodic(x[0] - y[0], geom.scale());
    case BaseKind::PeriodicPlane:
      return std::hypot(wrap_periodic(x[0] - y[0], geom.scale()), wrap_periodic(x[1] - y[1], geom.scale()));
    case BaseKind::Sphere: {
      const double ax = std::sin(x[0]) * std::cos(x[1]), ay = std::sin(x[0]) * std::sin(x[1]),
                   az = std::cos(x[0]);
      const double bx = std::sin(y[0]) * std::cos(y[1]), by = std::sin(y[0]) * std::sin(y[1]),
                   bz = std::cos(y[0]);
      const double cx = ay * bz - az * by, cy = az * bx - ax * bz, cz = ax * by - ay * bx;
      const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
      return geom.scale() * std::atan2(cross, ax * bx + ay * by + az * bz);
    }
  }
  return 0.0;
}

double unit_ball_volume(int dimension) {
  switch (dimension) {
    case 1:
      return 2.0;
    case 2:
      return kPi;
    default:
      return std::pow(kPi, dimension / 2.0) / std::tgamma(dimension / 2.0 + 1.0);
  }
}

double ball_volume(const BaseGeometry& geom, const Point&, double r) {
  if (!(r > 0.0) || r >= geom.injectivity_radius())
    throw DomainError("ball_volume: radius must lie in (0, injectivity radius)");
  switch (geom.kind()) {
    case BaseKind::Circle:
    case BaseKind::PeriodicLine:
      return 2.0 * r;
    case BaseKind::PeriodicPlane:
      return kPi * r * r;
    case BaseKind::Sphere: {
      const double R = geom.scale();
      return 2.0 * kPi * R * R * (1.0 - std::cos(r / R));
    }
  }
  return 0.0;
}

VolumeBoundCheck check_volume_bounds(const BaseGeometry& geom, const Point& x, double r) {
  VolumeBoundCheck c;
  c.volume = ball_volume(geom, x, r);
  const double model = unit_ball_volume(geom.dimension()) * std::pow(r, geom.dimension());
  c.lower = 0.5 * model;
  c.upper = 2.0 * model;
  c.pass = c.lower <= c.volume && c.volume <= c.upper;
  return c;
}

double volume_comparison_radius(const BaseGeometry& geom) { return 0.5 * geom.injectivity_radius(); }

EvolvingGeometry::EvolvingGeometry(BaseGeometry base, double horizon) : base_(std::move(base)), horizon_(horizon) {
  if (!base_.is_round()) throw std::invalid_argument("EvolvingGeometry: base must be a circle or sphere");
  if (!(horizon_ > 0.0) || horizon_ >= extinction_time())
    throw DomainError("EvolvingGeometry: horizon must lie in (0, R0^2 / (2n))");
}

double EvolvingGeometry::extinction_time() const noexcept {
  const double R0 = base_.scale();
  return R0 * R0 / (2.0 * base_.dimension());
}

double EvolvingGeometry::radius(double t) const {
  if (t < 0.0 || t >= extinction_time()) throw DomainError("shrink_radius: time outside [0, extinction)");
  const double R0 = base_.scale();
  return std::sqrt(R0 * R0 - 2.0 * base_.dimension() * t);
}

double EvolvingGeometry::conformal_time(double t) const {
  if (t < 0.0 || t >= extinction_time()) throw DomainError("conformal_time: time outside [0, extinction)");
  const double R0 = base_.scale();
  const double n = base_.dimension();
  return -std::log1p(-2.0 * n * t / (R0 * R0)) / (2.0 * n);
}

double shrink_radius(const EvolvingGeometry& evolving, double t) { return evolving.radius(t); }
double conformal_time(const EvolvingGeometry& evolving, double t) { return evolving.conformal_time(t); }

}  // namespace mcf
