#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ditras/tessellation.hpp"

namespace ditras {

/// One raw observation: a user seen at (x, y) at `timestamp` (epoch seconds).
struct RawRecord {
  std::string user;
  double x = 0.0;
  double y = 0.0;
  std::int64_t timestamp = 0;
};

/// Slot-indexed sequence of per-user abstract location ids.
///
/// Slot i covers [start_slot_epoch + i*slot_seconds, start_slot_epoch + (i+1)*slot_seconds).
/// Slots are aligned to multiples of `slot_seconds` since the epoch, so the
/// absolute slot number start_slot_epoch/slot_seconds + i carries the phase
/// (hour of day, hour of week) used by the diary learner and the clustering.
struct AbstractTrajectory {
  std::string user;
  std::int64_t slot_seconds = 3600;
  std::int64_t start_slot_epoch = 0;
  std::vector<std::uint32_t> slots;

  std::int64_t first_absolute_slot() const { return start_slot_epoch / slot_seconds; }
};

/// How competing locations inside one slot are scored.
enum class SlotWeighting {
  /// Number of records (CDR semantics).
  record_count,
  /// Seconds from each record to the next one, clipped to the slot (GPS stays).
  dwell_time,
};

/// Builds the abstract trajectory of a single user.
///
/// Distinct (x, y) pairs become abstract ids 0, 1, ... in order of first
/// appearance. Per slot: the only location seen; else the one with the most
/// weight; ties go to the higher whole-record frequency, then the smaller id.
/// Empty slots repeat the previous slot. Throws EmptyUserError on no records,
/// ConfigError on a non-positive slot length and DataError on unsorted input.
AbstractTrajectory assign_slots(std::span<const RawRecord> records, std::int64_t slot_seconds,
                                SlotWeighting weighting = SlotWeighting::record_count);

struct LocationFilterResult {
  std::map<std::uint32_t, std::uint64_t> kept;
  /// Set when at most one location survives; such users are dropped.
  bool discard = false;
};

/// Drops locations whose share n_i/N of the user's records is <= min_freq.
LocationFilterResult filter_cdr_locations(const std::map<std::uint32_t, std::uint64_t>& counts, double min_freq);

/// Keeps users whose rate N/(hours*days) reaches min_rate.
std::set<std::string> filter_active_users(const std::map<std::string, std::uint64_t>& call_counts, double hours,
                                          double days, double min_rate);

struct GpsPoint {
  double x = 0.0;
  double y = 0.0;
  std::int64_t timestamp = 0;
};

struct Trip {
  GpsPoint origin;
  GpsPoint destination;
  std::size_t first_index = 0;
  std::size_t last_index = 0;
};

/// Splits a time-sorted track wherever consecutive points are more than
/// `stop_threshold_seconds` apart. Fewer than two points yield no trips.
std::vector<Trip> segment_gps_trips(std::span<const GpsPoint> points, std::int64_t stop_threshold_seconds);

/// True when the track averages at least `min_trips_per_day` trips over
/// `days` days.
bool keep_vehicle(std::size_t trip_count, double days, double min_trips_per_day = 1.0);

/// Turns trips into records at each trip's endpoints, ready for assign_slots.
std::vector<RawRecord> trips_to_records(std::span<const Trip> trips, const std::string& user);

/// Nearest centroid; ties go to the smaller id.
LocationId snap_to_tessellation(double x, double y, const WeightedTessellation& t);

/// Number of calendar days touched by [first, last] epoch seconds.
double calendar_days(std::int64_t first, std::int64_t last);

/// Settings for turning raw records into per-user abstract trajectories.
struct CorpusOptions {
  std::int64_t slot_seconds = 3600;
  /// Treat records as GPS fixes to be segmented into trips.
  bool gps = false;
  double min_location_freq = 0.005;
  double min_call_rate = 0.5;
  /// Length of the observation window; defaults to the calendar days the
  /// whole dataset touches.
  std::optional<double> observation_days;
  std::int64_t stop_threshold_seconds = 1200;
  double min_trips_per_day = 1.0;
  SlotWeighting weighting = SlotWeighting::record_count;
  /// When set, coordinates are replaced by the nearest centroid first.
  const WeightedTessellation* snap = nullptr;
};

/// Groups records by user (users in ascending id order, records stably
/// sorted by time), applies the CDR or GPS filters and assigns slots.
/// Throws EmptyCorpusError when nothing survives.
std::vector<AbstractTrajectory> build_abstract_corpus(std::span<const RawRecord> records, const CorpusOptions& options);

}  // namespace ditras
