#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ditras/ingestion.hpp"
#include "ditras/random.hpp"

namespace ditras {

enum class DiaryToken : char {
  routine = '1',
  non_routine = '0',
  separator = '|',
};

/// A word of routine/non-routine slots with '|' marking trips, e.g. 11|00|0|1.
struct MobilityDiary {
  std::vector<DiaryToken> tokens;
  std::size_t slot_count = 0;
  std::int64_t slot_seconds = 3600;

  std::string to_string() const;
  /// Throws DataError on characters other than '0', '1', '|'.
  static MobilityDiary parse(std::string_view text, std::int64_t slot_seconds = 3600);
};

/// Accepts words made of runs of 1s or 0s joined by single separators, where
/// every run of 0s is closed by a separator and a trailing run of 1s may stay
/// open. The empty word is accepted.
bool validate_tokens(std::span<const DiaryToken> tokens);

/// validate_tokens plus the slot_count bookkeeping.
bool validate_diary(const MobilityDiary& d);

/// Per-slot typical abstract location of a user.
struct TypicalDiary {
  std::vector<std::uint32_t> slots;

  static TypicalDiary constant(std::uint32_t home, std::size_t length) {
    return TypicalDiary{std::vector<std::uint32_t>(length, home)};
  }
};

/// Constant diary at the user's most frequent abstract location (ties: smaller id).
TypicalDiary home_typical_diary(const AbstractTrajectory& trajectory);

/// (phase within the period, in-routine flag).
struct DiaryState {
  std::uint32_t phase = 0;
  bool routine = true;

  friend bool operator==(const DiaryState&, const DiaryState&) = default;
};

/// Outgoing transition: back to routine at the next slot, or a non-routine
/// stay of `tau` slots ending at phase + tau.
struct DiaryTransition {
  bool to_routine = true;
  std::uint32_t tau = 1;

  static DiaryTransition routine() { return {true, 1}; }
  static DiaryTransition stay(std::uint32_t tau) { return {false, tau}; }
  friend bool operator==(const DiaryTransition&, const DiaryTransition&) = default;
};

/// Markov chain over 2P states (phase, routine). Each row has P+1 outcomes:
/// column 0 is "routine at the next slot" and column tau (1..P) is "non-routine
/// stay of tau slots".
class MarkovDiaryModel {
 public:
  MarkovDiaryModel(std::uint32_t period, std::int64_t slot_seconds);

  std::uint32_t period() const { return period_; }
  std::int64_t slot_seconds() const { return slot_seconds_; }
  std::size_t state_count() const { return 2 * static_cast<std::size_t>(period_); }
  std::size_t row_width() const { return static_cast<std::size_t>(period_) + 1; }

  DiaryState target(DiaryState from, DiaryTransition t) const;

  void add_observation(DiaryState from, DiaryTransition t, std::uint64_t n = 1);
  void merge_counts(const MarkovDiaryModel& other);
  std::uint64_t count(DiaryState from, DiaryTransition t) const;
  std::uint64_t row_count(DiaryState from) const;
  std::span<const std::uint64_t> count_row(DiaryState from) const;

  /// Rebuilds probabilities from counts; rows without counts become dead.
  void normalize();
  /// Installs a probability row directly (ground-truth models, loading).
  /// Throws InvalidModelError when entries are outside [0,1] or do not sum to 1.
  void set_row(DiaryState from, std::span<const double> probs);

  bool has_row(DiaryState from) const { return live_[index(from)] != 0; }
  double probability(DiaryState from, DiaryTransition t) const;
  std::span<const double> row(DiaryState from) const;

  /// Draws the next transition; dead rows return to routine.
  DiaryTransition sample(DiaryState from, Rng& rng) const;

 private:
  std::size_t index(DiaryState s) const;
  std::size_t column(DiaryTransition t) const;

  std::uint32_t period_;
  std::int64_t slot_seconds_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> probs_;
  std::vector<unsigned char> live_;
};

/// Accumulates one user's transitions into `model` (counts only).
void mdl_accumulate(const AbstractTrajectory& trajectory, const TypicalDiary& typical, MarkovDiaryModel& model);

/// Learns the diary chain from a corpus; throws EmptyCorpusError on an empty
/// corpus and ConfigMismatchError on inconsistent slot lengths.
MarkovDiaryModel mdl_learn(std::span<const AbstractTrajectory> trajectories, std::span<const TypicalDiary> typical,
                           std::uint32_t period);

/// Same, with each user's typical diary fixed at their most visited location.
MarkovDiaryModel mdl_learn(std::span<const AbstractTrajectory> trajectories, std::uint32_t period);

MobilityDiary md_generate(const MarkovDiaryModel& model, std::size_t n_slots, DiaryState start, Rng& rng);

/// A trip in every slot: 0|0|0|...
MobilityDiary rd_generate(std::size_t n_slots, std::int64_t slot_seconds = 3600);

/// Inverse-transform sampler for P(dt) ~ dt^(-1-beta) exp(-dt/tau), dt in hours.
class WaitingTimeSampler {
 public:
  WaitingTimeSampler(double beta, double tau_hours, double min_hours, double max_hours,
                     std::size_t grid_points = 20000);

  double sample_hours(Rng& rng) const;

  double beta() const { return beta_; }
  double tau_hours() const { return tau_; }
  double min_hours() const { return min_; }
  double max_hours() const { return max_; }

 private:
  double beta_, tau_, min_, max_;
  std::vector<double> log_grid_;
  std::vector<double> cdf_;
};

/// WT diary: stays drawn from `sampler`, rounded to whole slots (at least one).
MobilityDiary wt_generate(std::size_t n_slots, const WaitingTimeSampler& sampler, std::int64_t slot_seconds,
                          Rng& rng);

/// Convenience overload over [1 slot, 7 days].
MobilityDiary wt_generate(std::size_t n_slots, double beta, double tau_hours, std::int64_t slot_seconds, Rng& rng);

}  // namespace ditras
