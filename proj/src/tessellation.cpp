#include "ditras/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>

#include "ditras/errors.hpp"

namespace ditras {

namespace {

double to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

double point_distance(Point a, Point b, CoordinateSystem cs) {
  if (cs == CoordinateSystem::planar) {
    return std::hypot(a.x - b.x, a.y - b.y);
  }
  const double lat1 = to_radians(a.x);
  const double lat2 = to_radians(b.x);
  const double dlat = lat2 - lat1;
  const double dlon = to_radians(b.y - a.y);
  const double s = std::sin(dlat / 2.0);
  const double t = std::sin(dlon / 2.0);
  const double h = s * s + std::cos(lat1) * std::cos(lat2) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

WeightedTessellation::WeightedTessellation(std::vector<Location> locations, CoordinateSystem cs)
    : locations_(std::move(locations)), cs_(cs) {
  if (locations_.size() < 2) {
    throw InvalidTessellationError("a tessellation needs at least 2 locations, got " +
                                   std::to_string(locations_.size()));
  }
  std::vector<double> weights;
  weights.reserve(locations_.size());
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    const auto& l = locations_[i];
    if (!std::isfinite(l.x) || !std::isfinite(l.y)) {
      throw InvalidTessellationError("location " + std::to_string(i) + " has non-finite coordinates");
    }
    if (!std::isfinite(l.relevance) || l.relevance < 0.0) {
      throw InvalidTessellationError("location " + std::to_string(i) + " has invalid relevance");
    }
    total_relevance_ += l.relevance;
    weights.push_back(l.relevance);
  }
  if (!(total_relevance_ > 0.0)) {
    throw EmptyRelevanceError("every location has zero relevance");
  }
  relevance_sampler_ = CumulativeSampler(weights);
}

const Location& WeightedTessellation::at(LocationId id) const {
  if (id >= locations_.size()) {
    throw IndexError("location id " + std::to_string(id) + " out of range [0, " +
                     std::to_string(locations_.size()) + ")");
  }
  return locations_[id];
}

double WeightedTessellation::distance(LocationId a, LocationId b) const {
  const auto& la = at(a);
  const auto& lb = at(b);
  if (a == b) return 0.0;
  return point_distance({la.x, la.y}, {lb.x, lb.y}, cs_);
}

double distance(LocationId a, LocationId b, const WeightedTessellation& t) { return t.distance(a, b); }

MergedTessellation merge_coincident(std::span<const Location> locations) {
  MergedTessellation out;
  out.mapping.reserve(locations.size());
  std::map<std::pair<double, double>, LocationId> seen;
  for (const auto& l : locations) {
    auto [it, inserted] = seen.try_emplace({l.x, l.y}, static_cast<LocationId>(out.locations.size()));
    if (inserted) {
      out.locations.push_back(l);
    } else {
      out.locations[it->second].relevance += l.relevance;
    }
    out.mapping.push_back(it->second);
  }
  return out;
}

GravityMatrix::GravityMatrix(std::size_t n, std::vector<double> probs) : n_(n), probs_(std::move(probs)) {
  if (probs_.size() != n_ * n_) throw InvalidModelError("gravity matrix has the wrong number of entries");
}

GravityMatrix build_gravity_matrix(const WeightedTessellation& t) {
  const std::size_t n = t.size();
  const auto locs = t.locations();
  std::vector<double> w(n * n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = point_distance({locs[i].x, locs[i].y}, {locs[j].x, locs[j].y}, t.coordinate_system());
      if (!(d > 0.0)) {
        throw DegenerateDistanceError("locations " + std::to_string(i) + " and " + std::to_string(j) +
                                      " share the same coordinates");
      }
      const double v = locs[i].relevance * locs[j].relevance / (d * d);
      w[i * n + j] = v;
      w[j * n + i] = v;
      z += 2.0 * v;
    }
  }
  if (!(z > 0.0)) {
    throw EmptyRelevanceError("fewer than two locations carry relevance; no trip has positive probability");
  }
  for (double& v : w) v /= z;
  return GravityMatrix(n, std::move(w));
}

LocationId sample_by_relevance(const WeightedTessellation& t, Rng& rng) {
  std::vector<double> weights;
  weights.reserve(t.size());
  for (const auto& l : t.locations()) weights.push_back(l.relevance);
  const std::size_t idx = sample_weighted(weights, rng);
  if (idx >= weights.size()) throw EmptyRelevanceError("every location has zero relevance");
  return static_cast<LocationId>(idx);
}

RowSampler::RowSampler(std::size_t n, std::span<const double> weights)
    : n_(n), cdf_(n * n), last_positive_(n, n) {
  if (weights.size() != n * n) throw ConfigError("row sampler weights must be n x n");
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = weights[i * n + j];
      if (v > 0.0) {
        acc += v;
        last_positive_[i] = j;
      }
      cdf_[i * n + j] = acc;
    }
  }
}

std::size_t RowSampler::pick(std::size_t row, double target) const {
  const auto first = cdf_.begin() + static_cast<std::ptrdiff_t>(row * n_);
  const auto last = first + static_cast<std::ptrdiff_t>(n_);
  auto it = std::upper_bound(first, last, target);
  if (it == last) return last_positive_[row];
  return static_cast<std::size_t>(it - first);
}

std::size_t RowSampler::sample(std::size_t row, Rng& rng) const {
  const double total = row_total(row);
  if (!(total > 0.0)) return n_;
  return pick(row, rng.uniform() * total);
}

}  // namespace ditras
