#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ditras/engine.hpp"
#include "ditras/tessellation.hpp"

namespace ditras {

/// The nine standard mobility measures, in reporting order.
enum class MeasureKind {
  trip_distance,
  radius_of_gyration,
  mobility_entropy,
  location_frequency,
  visits_per_location,
  locations_per_user,
  trips_per_hour,
  stay_time,
  trips_per_day,
};

inline constexpr std::array<MeasureKind, 9> kAllMeasures = {
    MeasureKind::trip_distance,       MeasureKind::radius_of_gyration, MeasureKind::mobility_entropy,
    MeasureKind::location_frequency,  MeasureKind::visits_per_location, MeasureKind::locations_per_user,
    MeasureKind::trips_per_hour,      MeasureKind::stay_time,          MeasureKind::trips_per_day,
};

std::string_view measure_name(MeasureKind kind);
std::optional<MeasureKind> parse_measure(std::string_view name);

enum class Binning { log, linear };

/// Bins live on a fixed lattice so histograms built from different
/// populations line up: log bins are [10^(k/b), 10^((k+1)/b)), linear bins
/// are [origin + k*width, origin + (k+1)*width).
struct BinningScheme {
  Binning kind = Binning::linear;
  double bins_per_decade = 5.0;
  double width = 1.0;
  double origin = 0.0;

  static BinningScheme log_scale(double bins_per_decade = 5.0) { return {Binning::log, bins_per_decade, 1.0, 0.0}; }
  static BinningScheme linear_scale(double width, double origin = 0.0) { return {Binning::linear, 5.0, width, origin}; }

  /// Lattice index of the bin holding `value` (value > 0 for log bins).
  std::int64_t bin_index(double value) const;
  double edge(std::int64_t k) const;
};

/// Log bins for heavy-tailed measures, linear lattices for bounded ones.
BinningScheme default_scheme(MeasureKind kind);

/// Normalized density histogram: sum(densities[i] * width_i) == 1.
struct MeasureDistribution {
  MeasureKind kind = MeasureKind::trip_distance;
  BinningScheme scheme;
  std::vector<double> edges;
  std::vector<double> densities;
  std::size_t sample_count = 0;
  double mean = 0.0;

  std::size_t bins() const { return densities.size(); }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
  double mass(std::size_t i) const { return densities[i] * width(i); }
};

/// Throws EmptyDistributionError when no usable sample is left (log bins
/// ignore non-positive values).
MeasureDistribution build_distribution(std::span<const double> samples, MeasureKind kind, const BinningScheme& scheme);
MeasureDistribution build_distribution(std::span<const double> samples, MeasureKind kind, Binning binning);

/// Histogram of `values` where each value carries mass `weights[i]`.
MeasureDistribution build_weighted_distribution(std::span<const double> values, std::span<const double> weights,
                                                MeasureKind kind, const BinningScheme& scheme);

// Per-individual measures.

/// Distance of every consecutive-slot location change, in km.
std::vector<double> trip_distances(const SampledTrajectory& traj, const WeightedTessellation& t);

/// Slot-weighted root mean squared distance from the center of mass, in km.
double radius_of_gyration(const SampledTrajectory& traj, const WeightedTessellation& t);

/// Shannon entropy of slot visitation fractions over log(#distinct), 0 for one location.
double mobility_entropy(const SampledTrajectory& traj);

// Population measures.

/// Mean visitation fraction of each rank (rank 1 first) across the
/// individuals that have that many locations.
std::vector<double> location_frequency_by_rank(std::span<const SampledTrajectory> population);

/// Slot visits summed over the population, indexed by location.
std::vector<std::uint64_t> visits_per_location(std::span<const SampledTrajectory> population, std::size_t n_locations);

std::vector<std::uint64_t> locations_per_user(std::span<const SampledTrajectory> population);

/// Trips by hour of day of the arrival slot.
std::array<std::uint64_t, 24> trips_per_hour(std::span<const SampledTrajectory> population);

/// Trip count of every (individual, calendar day) covered by the data.
std::vector<std::uint64_t> trips_per_day(std::span<const SampledTrajectory> population);

/// Length in hours of every maximal run of identical locations.
std::vector<double> stay_times(std::span<const SampledTrajectory> population);

/// Values and weights feeding the distribution of `kind`.
struct MeasureSamples {
  std::vector<double> values;
  std::vector<double> weights;  // empty: unit weights
};

MeasureSamples measure_samples(MeasureKind kind, std::span<const SampledTrajectory> population,
                               const WeightedTessellation& t);

MeasureDistribution measure_distribution(MeasureKind kind, std::span<const SampledTrajectory> population,
                                         const WeightedTessellation& t);

}  // namespace ditras
