#include "ditras/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "ditras/errors.hpp"

namespace ditras {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, const std::string& source, std::size_t line, std::string_view what) {
  field = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(source, line, "invalid " + std::string(what) + " '" + std::string(field) + "'");
  }
  return value;
}

// Calls fn(line_number, fields) for every non-empty data line after the header.
template <typename Fn>
void for_each_row(std::string_view text, const std::string& source, std::size_t width,
                  std::initializer_list<std::initializer_list<std::string_view>> headers, Fn&& fn) {
  std::size_t line_no = 0;
  bool seen_header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (!seen_header) {
      seen_header = true;
      bool ok = false;
      for (const auto& h : headers) {
        if (h.size() != fields.size()) continue;
        ok = std::equal(h.begin(), h.end(), fields.begin(), [](std::string_view a, std::string_view b) { return a == trim(b); });
        if (ok) break;
      }
      if (!ok) throw ParseError(source, line_no, "unexpected header '" + std::string(trim(line)) + "'");
      continue;
    }
    if (fields.size() != width) {
      throw ParseError(source, line_no, "expected " + std::to_string(width) + " fields, found " +
                                            std::to_string(fields.size()));
    }
    fn(line_no, fields);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// ---------------------------------------------------------------------------

WeightedTessellation parse_tessellation(std::string_view text, CoordinateSystem cs, const std::string& source) {
  std::vector<Location> locations;
  const bool planar = cs == CoordinateSystem::planar;
  for_each_row(text, source, 4,
               {planar ? std::initializer_list<std::string_view>{"location_id", "x", "y", "relevance"}
                       : std::initializer_list<std::string_view>{"location_id", "lat", "lon", "relevance"}},
               [&](std::size_t line, const auto& f) {
                 const auto id = parse_number<std::uint64_t>(f[0], source, line, "location id");
                 if (id != locations.size()) {
                   throw ParseError(source, line, "location ids must run 0, 1, 2, ... in file order");
                 }
                 Location l;
                 l.x = parse_number<double>(f[1], source, line, "coordinate");
                 l.y = parse_number<double>(f[2], source, line, "coordinate");
                 l.relevance = parse_number<double>(f[3], source, line, "relevance");
                 locations.push_back(l);
               });
  return WeightedTessellation(std::move(locations), cs);
}

WeightedTessellation read_tessellation(const std::filesystem::path& path, CoordinateSystem cs, bool merge) {
  auto t = parse_tessellation(read_file(path), cs, path.string());
  if (!merge) return t;
  auto merged = merge_coincident(t.locations());
  return WeightedTessellation(std::move(merged.locations), cs);
}

std::string format_tessellation(const WeightedTessellation& t) {
  std::string out = t.coordinate_system() == CoordinateSystem::planar ? "location_id,x,y,relevance\n"
                                                                       : "location_id,lat,lon,relevance\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& l = t.locations()[i];
    out += std::to_string(i) + ',' + format_double(l.x) + ',' + format_double(l.y) + ',' + format_double(l.relevance) + '\n';
  }
  return out;
}

std::vector<RawRecord> parse_raw_records(std::string_view text, const std::string& source) {
  std::vector<RawRecord> out;
  for_each_row(text, source, 4, {{"user_id", "lat", "lon", "timestamp"}, {"user_id", "x", "y", "timestamp"}},
               [&](std::size_t line, const auto& f) {
                 RawRecord r;
                 r.user = std::string(trim(f[0]));
                 if (r.user.empty()) throw ParseError(source, line, "empty user id");
                 r.x = parse_number<double>(f[1], source, line, "coordinate");
                 r.y = parse_number<double>(f[2], source, line, "coordinate");
                 r.timestamp = parse_number<std::int64_t>(f[3], source, line, "timestamp");
                 out.push_back(std::move(r));
               });
  return out;
}

std::vector<AbstractTrajectory> parse_abstract_trajectories(std::string_view text, std::int64_t slot_seconds,
                                                            const std::string& source) {
  if (slot_seconds <= 0) throw ConfigError("slot length must be positive");
  std::vector<AbstractTrajectory> out;
  std::map<std::string, std::size_t, std::less<>> index;
  std::int64_t next_slot = 0;
  for_each_row(text, source, 3, {{"user_id", "slot_index", "abstract_location"}}, [&](std::size_t line, const auto& f) {
    const std::string_view user = trim(f[0]);
    const auto slot = parse_number<std::int64_t>(f[1], source, line, "slot index");
    const auto loc = parse_number<std::uint32_t>(f[2], source, line, "abstract location");
    if (out.empty() || out.back().user != user) {
      if (index.count(user) != 0) throw ParseError(source, line, "rows of user " + std::string(user) + " are not contiguous");
      index.emplace(std::string(user), out.size());
      AbstractTrajectory traj;
      traj.user = std::string(user);
      traj.slot_seconds = slot_seconds;
      traj.start_slot_epoch = slot * slot_seconds;
      out.push_back(std::move(traj));
    } else if (slot != next_slot) {
      throw ParseError(source, line, "expected slot " + std::to_string(next_slot) + ", found " + std::to_string(slot));
    }
    out.back().slots.push_back(loc);
    next_slot = slot + 1;
  });
  return out;
}

std::string format_abstract_trajectories(std::span<const AbstractTrajectory> trajectories) {
  std::string out = "user_id,slot_index,abstract_location\n";
  for (const auto& traj : trajectories) {
    const std::int64_t first = traj.first_absolute_slot();
    for (std::size_t i = 0; i < traj.slots.size(); ++i) {
      out += traj.user;
      out += ',';
      out += std::to_string(first + static_cast<std::int64_t>(i));
      out += ',';
      out += std::to_string(traj.slots[i]);
      out += '\n';
    }
  }
  return out;
}

std::string format_trajectories(std::span<const SampledTrajectory> trajectories, const WeightedTessellation& t) {
  std::string out = t.coordinate_system() == CoordinateSystem::planar ? "agent_id,slot_index,location_id,x,y\n"
                                                                       : "agent_id,slot_index,location_id,lat,lon\n";
  std::vector<std::string> coords(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& l = t.locations()[i];
    coords[i] = format_double(l.x) + ',' + format_double(l.y);
  }
  for (const auto& traj : trajectories) {
    const std::string agent = std::to_string(traj.agent);
    for (std::size_t i = 0; i < traj.slots.size(); ++i) {
      const LocationId l = traj.slots[i];
      if (l >= t.size()) throw IndexError("location id " + std::to_string(l) + " outside the tessellation");
      out += agent;
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += std::to_string(l);
      out += ',';
      out += coords[l];
      out += '\n';
    }
  }
  return out;
}

std::string format_trajectories_compact(std::span<const SampledTrajectory> trajectories) {
  std::string out = "agent_id,start_slot,end_slot,location_id\n";
  for (const auto& traj : trajectories) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < traj.slots.size(); ++i) {
      if (i + 1 < traj.slots.size() && traj.slots[i + 1] == traj.slots[i]) continue;
      out += std::to_string(traj.agent) + ',' + std::to_string(start) + ',' + std::to_string(i) + ',' +
             std::to_string(traj.slots[i]) + '\n';
      start = i + 1;
    }
  }
  return out;
}

std::vector<SampledTrajectory> parse_trajectories(std::string_view text, std::int64_t slot_seconds,
                                                  std::int64_t start_epoch, const std::string& source) {
  if (slot_seconds <= 0) throw ConfigError("slot length must be positive");
  // Peek at the header to choose the layout.
  std::string_view probe = text;
  while (!probe.empty() && trim(probe.substr(0, probe.find('\n'))).empty()) {
    const auto nl = probe.find('\n');
    probe.remove_prefix(nl == std::string_view::npos ? probe.size() : nl + 1);
  }
  const bool compact = split_csv_line(trim(probe.substr(0, probe.find('\n')))).size() == 4;

  std::vector<SampledTrajectory> out;
  std::map<std::size_t, std::size_t> index;
  std::int64_t next_slot = 0;
  auto open = [&](std::size_t line, std::size_t agent, std::int64_t first_slot) {
    if (out.empty() || out.back().agent != agent) {
      if (index.count(agent) != 0) {
        throw ParseError(source, line, "rows of agent " + std::to_string(agent) + " are not contiguous");
      }
      index.emplace(agent, out.size());
      SampledTrajectory traj;
      traj.agent = agent;
      traj.slot_seconds = slot_seconds;
      traj.start_epoch = start_epoch + first_slot * slot_seconds;
      out.push_back(std::move(traj));
      next_slot = first_slot;
    }
    if (first_slot != next_slot) {
      throw ParseError(source, line, "expected slot " + std::to_string(next_slot) + ", found " + std::to_string(first_slot));
    }
  };

  if (compact) {
    for_each_row(text, source, 4, {{"agent_id", "start_slot", "end_slot", "location_id"}},
                 [&](std::size_t line, const auto& f) {
                   const auto agent = parse_number<std::size_t>(f[0], source, line, "agent id");
                   const auto first = parse_number<std::int64_t>(f[1], source, line, "slot index");
                   const auto last = parse_number<std::int64_t>(f[2], source, line, "slot index");
                   const auto loc = parse_number<LocationId>(f[3], source, line, "location id");
                   if (last < first) throw ParseError(source, line, "run ends before it starts");
                   open(line, agent, first);
                   out.back().slots.insert(out.back().slots.end(), static_cast<std::size_t>(last - first + 1), loc);
                   next_slot = last + 1;
                 });
  } else {
    for_each_row(text, source, 5,
                 {{"agent_id", "slot_index", "location_id", "lat", "lon"}, {"agent_id", "slot_index", "location_id", "x", "y"}},
                 [&](std::size_t line, const auto& f) {
                   const auto agent = parse_number<std::size_t>(f[0], source, line, "agent id");
                   const auto slot = parse_number<std::int64_t>(f[1], source, line, "slot index");
                   const auto loc = parse_number<LocationId>(f[2], source, line, "location id");
                   open(line, agent, slot);
                   out.back().slots.push_back(loc);
                   next_slot = slot + 1;
                 });
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string serialize_model(const MarkovDiaryModel& model) {
  json doc;
  doc["period"] = model.period();
  doc["slot_seconds"] = model.slot_seconds();
  json rows = json::array();
  for (std::uint32_t r = 0; r < 2; ++r) {
    for (std::uint32_t h = 0; h < model.period(); ++h) {
      const DiaryState from{h, r == 1};
      if (!model.has_row(from)) continue;
      const auto probs = model.row(from);
      const auto counts = model.count_row(from);
      json transitions = json::array();
      for (std::size_t c = 0; c < probs.size(); ++c) {
        if (probs[c] == 0.0 && counts[c] == 0) continue;
        const DiaryTransition t = c == 0 ? DiaryTransition::routine() : DiaryTransition::stay(static_cast<std::uint32_t>(c));
        const DiaryState to = model.target(from, t);
        transitions.push_back({{"to", {to.phase, to.routine ? 1 : 0}}, {"tau", t.tau}, {"p", probs[c]}, {"count", counts[c]}});
      }
      rows.push_back({{"state", {h, r}}, {"transitions", std::move(transitions)}});
    }
  }
  doc["rows"] = std::move(rows);
  return doc.dump(1) + "\n";
}

MarkovDiaryModel parse_model(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidModelError(source + ": " + e.what());
  }
  try {
    const auto period = doc.at("period").get<std::uint32_t>();
    const auto slot_seconds = doc.at("slot_seconds").get<std::int64_t>();
    if (period < 1 || slot_seconds <= 0) throw InvalidModelError(source + ": period and slot length must be positive");
    MarkovDiaryModel model(period, slot_seconds);
    std::vector<unsigned char> seen(model.state_count(), 0);
    for (const auto& row : doc.at("rows")) {
      const auto state = row.at("state");
      const auto h = state.at(0).get<std::uint32_t>();
      const auto r = state.at(1).get<std::uint32_t>();
      if (h >= period || r > 1) throw InvalidModelError(source + ": state outside the model");
      const DiaryState from{h, r == 1};
      auto& mark = seen[r * period + h];
      if (mark != 0) throw InvalidModelError(source + ": duplicate row");
      mark = 1;
      std::vector<double> probs(model.row_width(), 0.0);
      for (const auto& tr : row.at("transitions")) {
        const auto to = tr.at("to");
        const auto to_phase = to.at(0).get<std::uint32_t>();
        const bool to_routine = to.at(1).get<std::uint32_t>() == 1;
        const auto tau = tr.at("tau").get<std::uint32_t>();
        const DiaryTransition t = to_routine ? DiaryTransition::routine() : DiaryTransition::stay(tau);
        if (tau < 1 || tau > period || (to_routine && tau != 1) || model.target(from, t).phase != to_phase) {
          throw InvalidModelError(source + ": inconsistent transition target");
        }
        const std::size_t c = to_routine ? 0 : tau;
        probs[c] += tr.at("p").get<double>();
        if (tr.contains("count")) model.add_observation(from, t, tr.at("count").get<std::uint64_t>());
      }
      model.set_row(from, probs);
    }
    return model;
  } catch (const json::exception& e) {
    throw InvalidModelError(source + ": " + e.what());
  }
}

std::string format_distribution(const MeasureDistribution& d) {
  std::string out = "bin_left,bin_right,density\n";
  for (std::size_t i = 0; i < d.bins(); ++i) {
    out += format_double(d.edges[i]) + ',' + format_double(d.edges[i + 1]) + ',' + format_double(d.densities[i]) + '\n';
  }
  return out;
}

}  // namespace ditras
