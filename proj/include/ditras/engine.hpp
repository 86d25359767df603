#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "ditras/diary.hpp"
#include "ditras/tessellation.hpp"
#include "ditras/trajectory.hpp"

namespace ditras {

/// One location per slot for one synthetic (or observed) individual.
struct SampledTrajectory {
  std::size_t agent = 0;
  std::int64_t slot_seconds = 3600;
  /// Epoch second at which slot 0 starts; drives hour-of-day bookkeeping.
  std::int64_t start_epoch = 0;
  std::vector<LocationId> slots;
};

enum class DiaryKind { md, rd, wt };
enum class TrajectoryKind { depr, swim, latp };

/// What feeds the preferential-return counts.
enum class VisitCounting {
  /// Every emitted slot adds one visit (dwell-weighted return).
  per_slot,
  /// Every arrival adds one visit.
  per_trip,
};

struct SimulationConfig {
  std::size_t n_agents = 1;
  std::size_t n_slots = 1;
  std::int64_t slot_seconds = 3600;
  std::int64_t start_epoch = 0;
  DiaryKind diary_kind = DiaryKind::md;
  TrajectoryKind trajectory_kind = TrajectoryKind::depr;
  DeprParams depr;
  double swim_alpha = 0.75;
  double latp_exponent = 1.5;
  double wt_beta = 0.8;
  double wt_tau_hours = 17.0;
  std::uint64_t seed = 0;
  VisitCounting counting = VisitCounting::per_slot;
  unsigned threads = 1;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

class DiaryGenerator {
 public:
  virtual ~DiaryGenerator() = default;
  virtual std::string_view name() const = 0;
  virtual MobilityDiary generate(std::size_t n_slots, Rng& rng) const = 0;
};

class MarkovDiaryGenerator final : public DiaryGenerator {
 public:
  MarkovDiaryGenerator(const MarkovDiaryModel& model, DiaryState start) : model_(model), start_(start) {}
  std::string_view name() const override { return "md"; }
  MobilityDiary generate(std::size_t n_slots, Rng& rng) const override {
    return md_generate(model_, n_slots, start_, rng);
  }

 private:
  const MarkovDiaryModel& model_;
  DiaryState start_;
};

class RandomDiaryGenerator final : public DiaryGenerator {
 public:
  explicit RandomDiaryGenerator(std::int64_t slot_seconds) : slot_seconds_(slot_seconds) {}
  std::string_view name() const override { return "rd"; }
  MobilityDiary generate(std::size_t n_slots, Rng&) const override { return rd_generate(n_slots, slot_seconds_); }

 private:
  std::int64_t slot_seconds_;
};

class WaitingTimeDiaryGenerator final : public DiaryGenerator {
 public:
  WaitingTimeDiaryGenerator(double beta, double tau_hours, std::int64_t slot_seconds)
      : sampler_(beta, tau_hours, static_cast<double>(slot_seconds) / 3600.0, 7.0 * 24.0),
        slot_seconds_(slot_seconds) {}
  std::string_view name() const override { return "wt"; }
  MobilityDiary generate(std::size_t n_slots, Rng& rng) const override {
    return wt_generate(n_slots, sampler_, slot_seconds_, rng);
  }

 private:
  WaitingTimeSampler sampler_;
  std::int64_t slot_seconds_;
};

/// Gives every distinct abstract location of `typical` one relevance-weighted
/// physical location and expands it slot by slot.
std::vector<LocationId> materialize_typical_diary(const TypicalDiary& typical, const WeightedTessellation& t,
                                                  Rng& rng);

/// Scans a diary into a trajectory. Routine slots take the typical location;
/// each run of non-routine slots takes one location from `sampler`, which
/// must differ from the typical location of the run's first slot (up to 16
/// redraws, then the sampler's deterministic best guess).
SampledTrajectory trajectory_from_diary(const MobilityDiary& diary, std::span<const LocationId> typical_locations,
                                        AgentLocationSampler& sampler, AgentSpatialState& state, Rng& rng,
                                        VisitCounting counting = VisitCounting::per_slot, std::size_t agent = 0);

/// Full pipeline for one agent on its own random stream (seed, agent).
SampledTrajectory generate_agent(std::size_t agent, const DiaryGenerator& diaries,
                                 const TrajectoryGenerator& trajectories, const WeightedTessellation& t,
                                 const SimulationConfig& config);

/// Generates the whole population. Output is independent of config.threads.
std::vector<SampledTrajectory> run_ditras(const DiaryGenerator& diaries, const TrajectoryGenerator& trajectories,
                                          const WeightedTessellation& t, const SimulationConfig& config);

}  // namespace ditras
