#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ditras/ingestion.hpp"

namespace ditras {

inline constexpr std::size_t kHoursPerWeek = 168;

/// For each hour of the week, the user's most frequent abstract location.
struct TypicalWeek {
  std::string user;
  std::vector<std::uint32_t> slots;
};

/// Hour of week h collects every slot whose absolute index is h mod 168.
/// Ties go to the location seen more often overall, then to the smaller id.
/// Throws ConfigError for non-hourly slots and InsufficientHistoryError
/// below 168 slots.
TypicalWeek extract_typical_week(const AbstractTrajectory& trajectory);

/// Relabels symbols 0, 1, 2, ... in order of first appearance so that users
/// with the same routine shape get the same sequence.
std::vector<std::uint32_t> canonical_symbols(std::span<const std::uint32_t> symbols);
TypicalWeek canonical_week(const TypicalWeek& week);

/// Unit-cost edit distance.
std::size_t levenshtein(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);
inline std::size_t levenshtein(const TypicalWeek& a, const TypicalWeek& b) { return levenshtein(a.slots, b.slots); }

/// Symmetric pairwise distances with a zero diagonal, stored once per pair.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, double d);

 private:
  std::size_t slot(std::size_t i, std::size_t j) const;

  std::size_t n_;
  std::vector<double> d_;
};

/// Levenshtein distances between all weeks, computed on `threads` workers.
DistanceMatrix pairwise_levenshtein(std::span<const TypicalWeek> weeks, unsigned threads = 1);

inline constexpr int kNoise = -1;

/// Density-based clustering. A point is core when at least `min_pts` points
/// (itself included) lie within `eps`. Clusters are numbered 0, 1, ... in the
/// order their first core point appears; border points reachable from two
/// clusters stay with the one expanded first.
std::vector<int> dbscan(const DistanceMatrix& distances, double eps, std::size_t min_pts);
std::vector<int> dbscan(std::span<const TypicalWeek> weeks, double eps, std::size_t min_pts);

/// Per-point silhouette (nullopt for noise); a point alone in its cluster scores 0.
std::vector<std::optional<double>> silhouette_samples(const DistanceMatrix& distances, std::span<const int> labels);

/// Mean silhouette over non-noise points. Throws UndefinedSilhouetteError
/// with fewer than two clusters.
double silhouette(const DistanceMatrix& distances, std::span<const int> labels);

/// Ascending distances of every point to its k-th nearest other point.
/// Throws InsufficientPointsError unless there are more than k points.
std::vector<double> knee_profile(const DistanceMatrix& distances, std::size_t k);

/// Point of `cluster` with the smallest total distance to its cluster mates
/// (smaller index on ties); nullopt for an empty cluster.
std::optional<std::size_t> medoid(const DistanceMatrix& distances, std::span<const int> labels, int cluster);

/// Number of points per cluster label 0..max.
std::vector<std::size_t> cluster_sizes(std::span<const int> labels);

}  // namespace ditras
