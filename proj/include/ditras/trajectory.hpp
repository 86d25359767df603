#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ditras/random.hpp"
#include "ditras/tessellation.hpp"

namespace ditras {

/// What a spatial generator knows about one agent: where it is, where it
/// lives and how often it has been everywhere so far.
class AgentSpatialState {
 public:
  /// Starts at `home` with one recorded visit there.
  explicit AgentSpatialState(LocationId home);

  LocationId current() const { return current_; }
  LocationId home() const { return home_; }
  std::size_t distinct_count() const { return visits_.size(); }
  std::uint64_t total_visits() const { return total_; }
  std::uint64_t visits(LocationId id) const;
  bool visited(LocationId id) const { return index_.count(id) != 0; }
  /// (location, count) in order of first visit.
  const std::vector<std::pair<LocationId, std::uint64_t>>& visit_counts() const { return visits_; }

  /// Adds `n` visits to `id` without moving.
  void record_visit(LocationId id, std::uint64_t n = 1);
  /// Moves to `id` and adds `n` visits there.
  void move_to(LocationId id, std::uint64_t n = 1);

 private:
  LocationId current_;
  LocationId home_;
  std::uint64_t total_ = 0;
  std::vector<std::pair<LocationId, std::uint64_t>> visits_;
  std::unordered_map<LocationId, std::size_t> index_;
};

struct DeprParams {
  double rho = 0.6;
  double gamma = 0.21;
};

/// Probability of exploring with `distinct_count` distinct visited locations:
/// rho * N^(-gamma), with N taken as at least 1.
double exploration_probability(std::size_t distinct_count, const DeprParams& params);

struct DeprChoice {
  LocationId location = 0;
  /// Outcome of the explore/return coin.
  bool explored = false;
  /// The coin said return but nothing other than the current location had
  /// been visited, so the agent explored.
  bool return_unavailable = false;
  /// The relevance fallback was used because the gravity row was empty.
  bool relevance_fallback = false;
};

/// Draws a previously visited location other than the current one,
/// proportionally to visit counts; nullopt when there is none.
std::optional<LocationId> preferential_return(const AgentSpatialState& state, Rng& rng);

/// Draws j != current from the gravity row of the current location; falls back
/// to relevance (excluding current) when that row is empty.
DeprChoice preferential_exploration(const AgentSpatialState& state, const GravityMatrix& gravity,
                                    const WeightedTessellation& t, Rng& rng);

/// One d-EPR decision. If the return branch has nothing to return to the
/// agent explores instead.
DeprChoice depr_step(const AgentSpatialState& state, const GravityMatrix& gravity, const WeightedTessellation& t,
                     const DeprParams& params, Rng& rng);

LocationId depr_next(const AgentSpatialState& state, const GravityMatrix& gravity, const WeightedTessellation& t,
                     const DeprParams& params, Rng& rng);

/// Relevance rescaled to [0,1] by min-max; constant relevance maps to 1.
std::vector<double> normalized_relevance(const WeightedTessellation& t);

/// SWIM weight alpha / (1 + d(home, L))^2 + (1 - alpha) * r_norm(L).
double swim_weight(double distance_from_home_km, double normalized_relevance, double alpha);

/// SWIM choice over every L != current.
LocationId swim_next(const AgentSpatialState& state, const WeightedTessellation& t, double alpha, Rng& rng);

/// LATP choice over every L != current with weight distance(current, L)^(-exponent).
/// Locations coincident with the current one are excluded; throws
/// DegenerateDistanceError when nothing is left.
LocationId latp_next(const AgentSpatialState& state, const WeightedTessellation& t, double exponent, Rng& rng);

// ---------------------------------------------------------------------------
// Precomputed generators used by the engine. A TrajectoryGenerator is
// immutable and shared; each agent gets its own AgentLocationSampler.

class AgentLocationSampler {
 public:
  virtual ~AgentLocationSampler() = default;
  /// Next non-routine location; never the current one.
  virtual LocationId next(const AgentSpatialState& state, Rng& rng) = 0;
  /// Deterministic best guess other than `exclude` and the current location,
  /// used when sampling keeps landing on an excluded location.
  virtual LocationId most_likely(const AgentSpatialState& state, LocationId exclude) const = 0;
};

class TrajectoryGenerator {
 public:
  virtual ~TrajectoryGenerator() = default;
  virtual std::string_view name() const = 0;
  virtual std::unique_ptr<AgentLocationSampler> for_agent(LocationId home) const = 0;
};

/// d-EPR over a prebuilt gravity matrix.
class DeprGenerator final : public TrajectoryGenerator {
 public:
  DeprGenerator(const WeightedTessellation& t, const GravityMatrix& gravity, DeprParams params);
  std::string_view name() const override { return "depr"; }
  std::unique_ptr<AgentLocationSampler> for_agent(LocationId home) const override;

  DeprChoice step(const AgentSpatialState& state, Rng& rng) const;
  const WeightedTessellation& tessellation() const { return t_; }
  const GravityMatrix& gravity() const { return gravity_; }

 private:
  const WeightedTessellation& t_;
  const GravityMatrix& gravity_;
  DeprParams params_;
  RowSampler rows_;
};

class SwimGenerator final : public TrajectoryGenerator {
 public:
  SwimGenerator(const WeightedTessellation& t, double alpha);
  std::string_view name() const override { return "swim"; }
  std::unique_ptr<AgentLocationSampler> for_agent(LocationId home) const override;

  const WeightedTessellation& tessellation() const { return t_; }
  double alpha() const { return alpha_; }
  std::span<const double> normalized_relevance() const { return rnorm_; }

 private:
  const WeightedTessellation& t_;
  double alpha_;
  std::vector<double> rnorm_;
};

class LatpGenerator final : public TrajectoryGenerator {
 public:
  LatpGenerator(const WeightedTessellation& t, double exponent);
  std::string_view name() const override { return "latp"; }
  std::unique_ptr<AgentLocationSampler> for_agent(LocationId home) const override;

  const WeightedTessellation& tessellation() const { return t_; }
  const RowSampler& rows() const { return rows_; }

 private:
  const WeightedTessellation& t_;
  double exponent_;
  RowSampler rows_;
};

}  // namespace ditras
