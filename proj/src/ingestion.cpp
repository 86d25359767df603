#include "ditras/ingestion.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <utility>

#include "ditras/errors.hpp"

namespace ditras {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

AbstractTrajectory assign_slots(std::span<const RawRecord> records, std::int64_t slot_seconds,
                                SlotWeighting weighting) {
  if (slot_seconds <= 0) throw ConfigError("slot length must be positive");
  if (records.empty()) throw EmptyUserError("user has no records");

  std::map<std::pair<double, double>, std::uint32_t> ids;
  std::vector<std::uint32_t> record_ids;
  std::vector<std::uint64_t> overall;
  record_ids.reserve(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (k > 0 && records[k].timestamp < records[k - 1].timestamp) {
      throw DataError("records of user '" + records[k].user + "' are not sorted by timestamp");
    }
    auto [it, inserted] =
        ids.try_emplace({records[k].x, records[k].y}, static_cast<std::uint32_t>(overall.size()));
    if (inserted) overall.push_back(0);
    ++overall[it->second];
    record_ids.push_back(it->second);
  }

  const std::int64_t first_slot = floor_div(records.front().timestamp, slot_seconds);
  const std::int64_t last_slot = floor_div(records.back().timestamp, slot_seconds);

  AbstractTrajectory out;
  out.user = records.front().user;
  out.slot_seconds = slot_seconds;
  out.start_slot_epoch = first_slot * slot_seconds;
  out.slots.reserve(static_cast<std::size_t>(last_slot - first_slot + 1));

  std::vector<double> weight(overall.size(), 0.0);
  std::vector<std::uint32_t> touched;
  std::size_t k = 0;
  for (std::int64_t slot = first_slot; slot <= last_slot; ++slot) {
    const std::int64_t slot_end = (slot + 1) * slot_seconds;
    touched.clear();
    for (; k < records.size() && floor_div(records[k].timestamp, slot_seconds) == slot; ++k) {
      const std::uint32_t id = record_ids[k];
      double w = 1.0;
      if (weighting == SlotWeighting::dwell_time) {
        const std::int64_t next = (k + 1 < records.size()) ? records[k + 1].timestamp : records[k].timestamp;
        w = static_cast<double>(std::max<std::int64_t>(1, std::min(next, slot_end) - records[k].timestamp));
      }
      if (weight[id] == 0.0) touched.push_back(id);
      weight[id] += w;
    }
    if (touched.empty()) {
      out.slots.push_back(out.slots.back());
      continue;
    }
    std::uint32_t best = touched.front();
    for (std::uint32_t id : touched) {
      if (weight[id] > weight[best] ||
          (weight[id] == weight[best] &&
           (overall[id] > overall[best] || (overall[id] == overall[best] && id < best)))) {
        best = id;
      }
    }
    out.slots.push_back(best);
    for (std::uint32_t id : touched) weight[id] = 0.0;
  }
  return out;
}

LocationFilterResult filter_cdr_locations(const std::map<std::uint32_t, std::uint64_t>& counts, double min_freq) {
  if (min_freq < 0.0 || min_freq > 1.0) throw ConfigError("min_freq must lie in [0, 1]");
  std::uint64_t total = 0;
  for (const auto& [loc, n] : counts) total += n;
  LocationFilterResult out;
  for (const auto& [loc, n] : counts) {
    if (n == 0) continue;
    const double f = static_cast<double>(n) / static_cast<double>(total);
    if (f > min_freq) out.kept.emplace(loc, n);
  }
  out.discard = out.kept.size() <= 1;
  return out;
}

std::set<std::string> filter_active_users(const std::map<std::string, std::uint64_t>& call_counts, double hours,
                                          double days, double min_rate) {
  if (!(hours > 0.0) || !(days > 0.0)) throw ConfigError("hours and days must be positive");
  std::set<std::string> kept;
  for (const auto& [user, n] : call_counts) {
    const double rate = static_cast<double>(n) / (hours * days);
    if (rate >= min_rate) kept.insert(user);
  }
  return kept;
}

std::vector<Trip> segment_gps_trips(std::span<const GpsPoint> points, std::int64_t stop_threshold_seconds) {
  if (stop_threshold_seconds <= 0) throw ConfigError("stop threshold must be positive");
  std::vector<Trip> trips;
  if (points.size() < 2) return trips;
  std::size_t start = 0;
  auto close = [&](std::size_t last) { trips.push_back(Trip{points[start], points[last], start, last}); };
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].timestamp < points[i - 1].timestamp) throw DataError("GPS points are not sorted by timestamp");
    if (points[i].timestamp - points[i - 1].timestamp > stop_threshold_seconds) {
      close(i - 1);
      start = i;
    }
  }
  close(points.size() - 1);
  return trips;
}

bool keep_vehicle(std::size_t trip_count, double days, double min_trips_per_day) {
  if (!(days > 0.0)) throw ConfigError("observation window must be positive");
  return static_cast<double>(trip_count) / days >= min_trips_per_day;
}

std::vector<RawRecord> trips_to_records(std::span<const Trip> trips, const std::string& user) {
  std::vector<RawRecord> out;
  out.reserve(trips.size() * 2);
  for (const auto& trip : trips) {
    out.push_back({user, trip.origin.x, trip.origin.y, trip.origin.timestamp});
    if (trip.last_index != trip.first_index) {
      out.push_back({user, trip.destination.x, trip.destination.y, trip.destination.timestamp});
    }
  }
  return out;
}

LocationId snap_to_tessellation(double x, double y, const WeightedTessellation& t) {
  LocationId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const auto locs = t.locations();
  for (std::size_t i = 0; i < locs.size(); ++i) {
    const double d = point_distance({x, y}, {locs[i].x, locs[i].y}, t.coordinate_system());
    if (d < best_d) {
      best_d = d;
      best = static_cast<LocationId>(i);
    }
  }
  return best;
}

double calendar_days(std::int64_t first, std::int64_t last) {
  return static_cast<double>(floor_div(last, 86400) - floor_div(first, 86400) + 1);
}

std::vector<AbstractTrajectory> build_abstract_corpus(std::span<const RawRecord> records, const CorpusOptions& options) {
  if (records.empty()) throw EmptyCorpusError("no records");
  if (options.slot_seconds <= 0) throw ConfigError("slot length must be positive");

  std::map<std::string, std::vector<RawRecord>> by_user;
  std::int64_t first = records.front().timestamp;
  std::int64_t last = first;
  for (const auto& r : records) {
    RawRecord copy = r;
    if (options.snap != nullptr) {
      const auto& l = options.snap->at(snap_to_tessellation(r.x, r.y, *options.snap));
      copy.x = l.x;
      copy.y = l.y;
    }
    by_user[r.user].push_back(std::move(copy));
    first = std::min(first, r.timestamp);
    last = std::max(last, r.timestamp);
  }
  const double days = options.observation_days.value_or(calendar_days(first, last));
  if (!(days > 0.0)) throw ConfigError("observation window must be positive");

  std::vector<AbstractTrajectory> out;
  for (auto& [user, recs] : by_user) {
    std::stable_sort(recs.begin(), recs.end(), [](const RawRecord& a, const RawRecord& b) { return a.timestamp < b.timestamp; });

    if (options.gps) {
      std::vector<GpsPoint> points;
      points.reserve(recs.size());
      for (const auto& r : recs) points.push_back({r.x, r.y, r.timestamp});
      const auto trips = segment_gps_trips(points, options.stop_threshold_seconds);
      if (trips.empty() || !keep_vehicle(trips.size(), days, options.min_trips_per_day)) continue;
      const auto stops = trips_to_records(trips, user);
      out.push_back(assign_slots(stops, options.slot_seconds, options.weighting));
      continue;
    }

    const std::map<std::string, std::uint64_t> calls{{user, recs.size()}};
    if (filter_active_users(calls, 24.0, days, options.min_call_rate).empty()) continue;

    std::map<std::pair<double, double>, std::uint32_t> ids;
    std::map<std::uint32_t, std::uint64_t> counts;
    std::vector<std::uint32_t> record_ids;
    record_ids.reserve(recs.size());
    for (const auto& r : recs) {
      const auto id = ids.try_emplace({r.x, r.y}, static_cast<std::uint32_t>(ids.size())).first->second;
      ++counts[id];
      record_ids.push_back(id);
    }
    const auto filtered = filter_cdr_locations(counts, options.min_location_freq);
    if (filtered.discard) continue;
    std::vector<RawRecord> kept;
    kept.reserve(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (filtered.kept.count(record_ids[i]) != 0) kept.push_back(recs[i]);
    }
    out.push_back(assign_slots(kept, options.slot_seconds, options.weighting));
  }
  if (out.empty()) throw EmptyCorpusError("no user survived filtering");
  return out;
}

}  // namespace ditras
