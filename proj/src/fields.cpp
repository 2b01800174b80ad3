#include "mcf/fields.hpp"

#include <stdexcept>

#include "mcf/errors.hpp"

namespace mcf {

GraphFunction::GraphFunction(BaseGeometry geom, std::vector<double> values)
    : GraphFunction(geom, std::move(values), geom.scale()) {}

GraphFunction::GraphFunction(BaseGeometry geom, std::vector<double> values, double base_radius,
                             std::optional<double> time)
    : geom_(std::move(geom)), values_(std::move(values)), base_radius_(base_radius), time_(time) {
  if (values_.size() != geom_.point_count()) throw std::invalid_argument("GraphFunction: size mismatch");
  if (!(base_radius_ > 0.0)) throw DomainError("GraphFunction: base radius must be positive");
}

SpaceTimeField::SpaceTimeField(BaseGeometry geom, std::vector<double> times,
                               std::optional<EvolvingGeometry> evolving)
    : geom_(std::move(geom)), times_(std::move(times)), evolving_(std::move(evolving)) {
  if (times_.size() < 2) throw std::invalid_argument("SpaceTimeField: need at least two time nodes");
  if (times_.front() != 0.0) throw std::invalid_argument("SpaceTimeField: time grid must start at 0");
  for (std::size_t j = 1; j < times_.size(); ++j)
    if (!(times_[j] > times_[j - 1])) throw std::invalid_argument("SpaceTimeField: times must increase");
  if (evolving_ && times_.back() >= evolving_->extinction_time())
    throw DomainError("SpaceTimeField: time grid reaches extinction of the base flow");
  points_ = geom_.point_count();
  values_.assign(points_ * times_.size(), 0.0);
}

std::span<double> SpaceTimeField::slice(std::size_t j) {
  return std::span<double>(values_).subspan(j * points_, points_);
}

std::span<const double> SpaceTimeField::slice(std::size_t j) const {
  return std::span<const double>(values_).subspan(j * points_, points_);
}

double SpaceTimeField::base_radius(std::size_t j) const {
  if (evolving_) return evolving_->radius(times_.at(j));
  return geom_.scale();
}

GraphFunction SpaceTimeField::graph(std::size_t j) const {
  auto s = slice(j);
  return GraphFunction(geom_, {s.begin(), s.end()}, base_radius(j), times_[j]);
}

void SpaceTimeField::check_compatible(const SpaceTimeField& other) const {
  if (other.values_.size() != values_.size() || other.times_ != times_)
    throw std::invalid_argument("SpaceTimeField: incompatible grids");
}

SpaceTimeField& SpaceTimeField::operator+=(const SpaceTimeField& other) {
  check_compatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SpaceTimeField& SpaceTimeField::operator-=(const SpaceTimeField& other) {
  check_compatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

SpaceTimeField& SpaceTimeField::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

SpaceTimeField SpaceTimeField::zeros_like() const { return SpaceTimeField(geom_, times_, evolving_); }

SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b) { return a -= b; }
SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b) { return a += b; }
SpaceTimeField operator*(double s, SpaceTimeField a) { return a *= s; }

std::vector<double> uniform_times(double horizon, int steps) {
  if (!(horizon > 0.0) || steps < 1) throw std::invalid_argument("uniform_times: need T > 0 and steps >= 1");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int j = 0; j <= steps; ++j) t[j] = horizon * j / steps;
  t.back() = horizon;
  return t;
}

}  // namespace mcf
