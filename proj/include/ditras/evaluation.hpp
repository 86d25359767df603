#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ditras/engine.hpp"
#include "ditras/measures.hpp"

namespace ditras {

/// Per-bin masses of two distributions laid on one shared lattice.
struct SharedBins {
  std::vector<double> edges;
  std::vector<double> reference;  // masses
  std::vector<double> synthetic;  // masses

  std::size_t size() const { return reference.size(); }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
};

/// Rebins both distributions onto the union of their supports using the
/// reference's binning scheme. Mass of a source bin is spread over target
/// bins in proportion to overlap, which is exact when the lattices coincide.
SharedBins align_distributions(const MeasureDistribution& reference, const MeasureDistribution& synthetic);

inline constexpr double kKlSmoothing = 1e-12;

/// Root mean squared difference of densities over the shared bins.
/// Throws IncomparableDistributionsError if the supports do not intersect.
double rmse(const MeasureDistribution& real, const MeasureDistribution& synth);

/// KL(real || synth) in nats on smoothed, renormalized bin masses.
double kl_divergence(const MeasureDistribution& real, const MeasureDistribution& synth);

/// Fraction of reference mass in bins where the synthetic has no mass.
double uncovered_reference_mass(const MeasureDistribution& real, const MeasureDistribution& synth);

struct FitCell {
  std::string model;
  MeasureKind measure = MeasureKind::trip_distance;
  bool comparable = false;
  double rmse = 0.0;
  double kl = 0.0;
};

struct FitReport {
  std::vector<std::string> models;
  /// cells[m * kAllMeasures.size() + k] for model m and measure kAllMeasures[k].
  std::vector<FitCell> cells;
  /// Lowest-RMSE model per measure, ties to the lexicographically smallest name.
  std::vector<std::optional<std::string>> best;

  const FitCell& cell(std::size_t model, std::size_t measure) const { return cells[model * kAllMeasures.size() + measure]; }
};

struct LabeledPopulation {
  std::string name;
  std::span<const SampledTrajectory> trajectories;
};

/// Distribution of every measure, or nothing when the population yields no samples.
std::vector<std::optional<MeasureDistribution>> all_distributions(std::span<const SampledTrajectory> population,
                                                                  const WeightedTessellation& t);

/// Compares one cell; an empty side or more than half of the reference mass
/// falling where the synthetic has none makes the cell incomparable.
FitCell compare_cell(const std::string& model, MeasureKind measure, const std::optional<MeasureDistribution>& reference,
                     const std::optional<MeasureDistribution>& synthetic);

FitReport scorecard(std::span<const LabeledPopulation> models, std::span<const SampledTrajectory> reference,
                    const WeightedTessellation& t);

/// `model,measure,rmse,kl,comparable` with "-" in incomparable cells.
void write_scorecard_csv(std::ostream& out, const FitReport& report);

/// One column per measure, an RMSE row and a KL row per model; the best
/// RMSE of each column carries a trailing '*'.
void write_scorecard_table(std::ostream& out, const FitReport& report);

}  // namespace ditras
