#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mcf/geometry.hpp"

namespace mcf {

/// Normal-graph height u sampled on the grid of a base hypersurface.
/// `base_radius` is the radius of the round base the graph is taken over;
/// it differs from geom.scale() for slices over a shrinking base M_t.
class GraphFunction {
 public:
  GraphFunction(BaseGeometry geom, std::vector<double> values);
  GraphFunction(BaseGeometry geom, std::vector<double> values, double base_radius,
                std::optional<double> time = std::nullopt);

  const BaseGeometry& geometry() const noexcept { return geom_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double base_radius() const noexcept { return base_radius_; }
  std::optional<double> time() const noexcept { return time_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  BaseGeometry geom_;
  std::vector<double> values_;
  double base_radius_;
  std::optional<double> time_;
};

/// Space-time samples on a time grid 0 = t_0 < ... < t_J. When `evolving` is
/// set the slices are graphs over the shrinking base M_t and all metric
/// quantities use R(t).
class SpaceTimeField {
 public:
  SpaceTimeField(BaseGeometry geom, std::vector<double> times,
                 std::optional<EvolvingGeometry> evolving = std::nullopt);

  const BaseGeometry& geometry() const noexcept { return geom_; }
  const std::optional<EvolvingGeometry>& evolving() const noexcept { return evolving_; }
  std::span<const double> times() const noexcept { return times_; }
  std::size_t time_count() const noexcept { return times_.size(); }
  std::size_t point_count() const noexcept { return points_; }
  double horizon() const noexcept { return times_.back(); }

  std::span<double> slice(std::size_t j);
  std::span<const double> slice(std::size_t j) const;
  double base_radius(std::size_t j) const;
  GraphFunction graph(std::size_t j) const;

  std::span<const double> data() const noexcept { return values_; }
  std::span<double> data() noexcept { return values_; }

  SpaceTimeField& operator+=(const SpaceTimeField& other);
  SpaceTimeField& operator-=(const SpaceTimeField& other);
  SpaceTimeField& operator*=(double s);

  /// Same grid and metric family, zero values.
  SpaceTimeField zeros_like() const;

 private:
  void check_compatible(const SpaceTimeField& other) const;

  BaseGeometry geom_;
  std::vector<double> times_;
  std::optional<EvolvingGeometry> evolving_;
  std::size_t points_;
  std::vector<double> values_;
};

SpaceTimeField operator-(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator+(SpaceTimeField a, const SpaceTimeField& b);
SpaceTimeField operator*(double s, SpaceTimeField a);

/// J uniform steps on [0, T] (J + 1 nodes).
std::vector<double> uniform_times(double horizon, int steps);

}  // namespace mcf
