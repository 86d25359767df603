#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ditras/clustering.hpp"
#include "ditras/diary.hpp"
#include "ditras/engine.hpp"
#include "ditras/ingestion.hpp"
#include "ditras/measures.hpp"
#include "ditras/tessellation.hpp"

namespace ditras {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Whole file as a string; DataError when unreadable.
std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Splits one CSV line on commas after dropping a trailing '\r'.
std::vector<std::string_view> split_csv_line(std::string_view line);

// Tessellation: `location_id,lat,lon,relevance` or `location_id,x,y,relevance`.
// Ids must run 0..n-1 in file order.
WeightedTessellation parse_tessellation(std::string_view text, CoordinateSystem cs, const std::string& source);
WeightedTessellation read_tessellation(const std::filesystem::path& path, CoordinateSystem cs, bool merge = false);
std::string format_tessellation(const WeightedTessellation& t);

// Raw records: `user_id,lat,lon,timestamp`, timestamps in epoch seconds.
std::vector<RawRecord> parse_raw_records(std::string_view text, const std::string& source);

// Abstract trajectories: `user_id,slot_index,abstract_location` with absolute
// slot indices (epoch seconds / slot_seconds). Rows of a user must be
// consecutive slots.
std::vector<AbstractTrajectory> parse_abstract_trajectories(std::string_view text, std::int64_t slot_seconds,
                                                            const std::string& source);
std::string format_abstract_trajectories(std::span<const AbstractTrajectory> trajectories);

// Sampled trajectories: `agent_id,slot_index,location_id,lat,lon` (x,y when
// planar) or compact runs `agent_id,start_slot,end_slot,location_id` with
// inclusive ends. Both forms are accepted when reading.
std::string format_trajectories(std::span<const SampledTrajectory> trajectories, const WeightedTessellation& t);
std::string format_trajectories_compact(std::span<const SampledTrajectory> trajectories);
std::vector<SampledTrajectory> parse_trajectories(std::string_view text, std::int64_t slot_seconds,
                                                  std::int64_t start_epoch, const std::string& source);

// Diary model JSON: {period, slot_seconds, rows: [{state: [h, R],
// transitions: [{to: [h', R'], tau, p, count}]}]}. tau counts the slots
// a transition advances, so routine moves have tau 1.
std::string serialize_model(const MarkovDiaryModel& model);
MarkovDiaryModel parse_model(std::string_view text, const std::string& source);

/// `bin_left,bin_right,density`.
std::string format_distribution(const MeasureDistribution& d);

}  // namespace ditras
