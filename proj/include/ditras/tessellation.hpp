#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ditras/random.hpp"

namespace ditras {

/// Index of a location inside a WeightedTessellation.
using LocationId = std::uint32_t;

enum class CoordinateSystem { geographic, planar };

/// Mean Earth radius used for great-circle distances, in km.
inline constexpr double kEarthRadiusKm = 6371.0088;

/// A tile centroid. For geographic tessellations `x` is the latitude and `y`
/// the longitude, both in degrees; planar coordinates are taken to be km.
struct Location {
  double x = 0.0;
  double y = 0.0;
  double relevance = 0.0;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Great-circle (haversine) or Euclidean distance in km.
double point_distance(Point a, Point b, CoordinateSystem cs);

/// The discrete mobility space: centroids with a relevance weight each.
/// Immutable after construction.
class WeightedTessellation {
 public:
  /// Throws InvalidTessellationError when fewer than two locations are given
  /// or a relevance is negative/non-finite, and EmptyRelevanceError when no
  /// relevance is positive.
  WeightedTessellation(std::vector<Location> locations, CoordinateSystem cs);

  std::size_t size() const { return locations_.size(); }
  CoordinateSystem coordinate_system() const { return cs_; }
  std::span<const Location> locations() const { return locations_; }
  double total_relevance() const { return total_relevance_; }

  /// Bounds-checked access; throws IndexError.
  const Location& at(LocationId id) const;
  Point point(LocationId id) const {
    const auto& l = at(id);
    return {l.x, l.y};
  }

  double distance(LocationId a, LocationId b) const;

  /// Relevance-proportional sampler over all location ids.
  const CumulativeSampler& relevance_sampler() const { return relevance_sampler_; }

 private:
  std::vector<Location> locations_;
  CoordinateSystem cs_;
  double total_relevance_ = 0.0;
  CumulativeSampler relevance_sampler_;
};

double distance(LocationId a, LocationId b, const WeightedTessellation& t);

/// Result of collapsing locations that share coordinates.
struct MergedTessellation {
  std::vector<Location> locations;
  /// old id -> new id
  std::vector<LocationId> mapping;
};

/// Merges locations with identical coordinates, summing their relevances.
/// Surviving locations keep the order of their first occurrence.
MergedTessellation merge_coincident(std::span<const Location> locations);

/// Dense |L|x|L| origin-destination probabilities p_ij = r_i r_j / d_ij^2 / Z
/// with a zero diagonal and Z the sum over every off-diagonal entry.
class GravityMatrix {
 public:
  GravityMatrix() = default;
  GravityMatrix(std::size_t n, std::vector<double> probs);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return probs_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {probs_.data() + i * n_, n_}; }
  std::span<const double> data() const { return probs_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> probs_;
};

/// Throws DegenerateDistanceError when two locations coincide.
GravityMatrix build_gravity_matrix(const WeightedTessellation& t);

/// Draws a location with probability r_j / sum(r).
LocationId sample_by_relevance(const WeightedTessellation& t, Rng& rng);

/// Row-wise cumulative tables over a dense non-negative weight matrix, so a
/// destination can be drawn from any origin row in O(log n).
class RowSampler {
 public:
  RowSampler() = default;
  /// `weights` is row-major n x n.
  RowSampler(std::size_t n, std::span<const double> weights);

  std::size_t size() const { return n_; }
  double row_total(std::size_t i) const { return cdf_[i * n_ + n_ - 1]; }
  /// Returns size() when the row carries no mass.
  std::size_t sample(std::size_t row, Rng& rng) const;
  std::size_t pick(std::size_t row, double target) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> cdf_;
  std::vector<std::size_t> last_positive_;
};

}  // namespace ditras
