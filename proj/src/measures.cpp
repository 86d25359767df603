#include "ditras/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

#include "ditras/errors.hpp"

namespace ditras {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t slot_start(const SampledTrajectory& traj, std::size_t i) {
  return traj.start_epoch + static_cast<std::int64_t>(i) * traj.slot_seconds;
}

// (location, slot count) sorted by count desc, then id asc.
std::vector<std::pair<LocationId, std::uint64_t>> ranked_counts(const SampledTrajectory& traj) {
  std::unordered_map<LocationId, std::uint64_t> counts;
  for (auto l : traj.slots) ++counts[l];
  std::vector<std::pair<LocationId, std::uint64_t>> out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

}  // namespace

std::string_view measure_name(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::trip_distance: return "trip_distance";
    case MeasureKind::radius_of_gyration: return "radius_of_gyration";
    case MeasureKind::mobility_entropy: return "mobility_entropy";
    case MeasureKind::location_frequency: return "location_frequency";
    case MeasureKind::visits_per_location: return "visits_per_location";
    case MeasureKind::locations_per_user: return "locations_per_user";
    case MeasureKind::trips_per_hour: return "trips_per_hour";
    case MeasureKind::stay_time: return "stay_time";
    case MeasureKind::trips_per_day: return "trips_per_day";
  }
  return "unknown";
}

std::optional<MeasureKind> parse_measure(std::string_view name) {
  for (auto k : kAllMeasures) {
    if (measure_name(k) == name) return k;
  }
  return std::nullopt;
}

std::int64_t BinningScheme::bin_index(double value) const {
  if (kind == Binning::log) {
    return static_cast<std::int64_t>(std::floor(std::log10(value) * bins_per_decade + 1e-9));
  }
  return static_cast<std::int64_t>(std::floor((value - origin) / width + 1e-9));
}

double BinningScheme::edge(std::int64_t k) const {
  if (kind == Binning::log) return std::pow(10.0, static_cast<double>(k) / bins_per_decade);
  return origin + static_cast<double>(k) * width;
}

BinningScheme default_scheme(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::trip_distance:
    case MeasureKind::radius_of_gyration:
    case MeasureKind::visits_per_location:
    case MeasureKind::locations_per_user:
    case MeasureKind::stay_time:
      return BinningScheme::log_scale();
    case MeasureKind::mobility_entropy:
      return BinningScheme::linear_scale(0.05);
    case MeasureKind::location_frequency:
      return BinningScheme::linear_scale(1.0, 0.5);
    case MeasureKind::trips_per_hour:
      return BinningScheme::linear_scale(1.0);
    case MeasureKind::trips_per_day:
      return BinningScheme::linear_scale(1.0, -0.5);
  }
  return BinningScheme::linear_scale(1.0);
}

MeasureDistribution build_weighted_distribution(std::span<const double> values, std::span<const double> weights,
                                                MeasureKind kind, const BinningScheme& scheme) {
  if (!weights.empty() && weights.size() != values.size()) {
    throw ConfigError("distribution weights must match values");
  }
  if (scheme.kind == Binning::log && !(scheme.bins_per_decade > 0.0)) throw ConfigError("bins per decade must be positive");
  if (scheme.kind == Binning::linear && !(scheme.width > 0.0)) throw ConfigError("bin width must be positive");

  std::map<std::int64_t, double> mass;
  double total = 0.0;
  double weighted_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!std::isfinite(v) || !(w > 0.0)) continue;
    if (scheme.kind == Binning::log && !(v > 0.0)) continue;
    mass[scheme.bin_index(v)] += w;
    total += w;
    weighted_sum += w * v;
    ++used;
  }
  if (used == 0 || !(total > 0.0)) {
    throw EmptyDistributionError("no usable samples for " + std::string(measure_name(kind)));
  }

  MeasureDistribution d;
  d.kind = kind;
  d.scheme = scheme;
  d.sample_count = used;
  d.mean = weighted_sum / total;
  const std::int64_t lo = mass.begin()->first;
  const std::int64_t hi = mass.rbegin()->first;
  d.edges.reserve(static_cast<std::size_t>(hi - lo + 2));
  for (std::int64_t k = lo; k <= hi + 1; ++k) d.edges.push_back(scheme.edge(k));
  d.densities.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (const auto& [k, m] : mass) {
    const auto i = static_cast<std::size_t>(k - lo);
    d.densities[i] = m / (total * d.width(i));
  }
  return d;
}

MeasureDistribution build_distribution(std::span<const double> samples, MeasureKind kind, const BinningScheme& scheme) {
  return build_weighted_distribution(samples, {}, kind, scheme);
}

MeasureDistribution build_distribution(std::span<const double> samples, MeasureKind kind, Binning binning) {
  BinningScheme scheme = default_scheme(kind);
  if (scheme.kind != binning) scheme = binning == Binning::log ? BinningScheme::log_scale() : BinningScheme::linear_scale(1.0);
  return build_distribution(samples, kind, scheme);
}

// ---------------------------------------------------------------------------

std::vector<double> trip_distances(const SampledTrajectory& traj, const WeightedTessellation& t) {
  std::vector<double> out;
  for (std::size_t i = 1; i < traj.slots.size(); ++i) {
    if (traj.slots[i] != traj.slots[i - 1]) out.push_back(t.distance(traj.slots[i - 1], traj.slots[i]));
  }
  return out;
}

double radius_of_gyration(const SampledTrajectory& traj, const WeightedTessellation& t) {
  if (traj.slots.empty()) return 0.0;
  std::map<LocationId, std::uint64_t> counts;
  for (auto l : traj.slots) ++counts[l];
  if (counts.size() == 1) return 0.0;
  const double n = static_cast<double>(traj.slots.size());
  Point cm;
  for (const auto& [l, c] : counts) {
    const auto p = t.point(l);
    cm.x += static_cast<double>(c) / n * p.x;
    cm.y += static_cast<double>(c) / n * p.y;
  }
  double acc = 0.0;
  for (const auto& [l, c] : counts) {
    const double d = point_distance(t.point(l), cm, t.coordinate_system());
    acc += static_cast<double>(c) / n * d * d;
  }
  return std::sqrt(acc);
}

double mobility_entropy(const SampledTrajectory& traj) {
  std::map<LocationId, std::uint64_t> counts;
  for (auto l : traj.slots) ++counts[l];
  if (counts.size() <= 1) return 0.0;
  const double n = static_cast<double>(traj.slots.size());
  double h = 0.0;
  for (const auto& [l, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(counts.size()));
}

std::vector<double> location_frequency_by_rank(std::span<const SampledTrajectory> population) {
  std::vector<double> sum;
  std::vector<std::size_t> users;
  for (const auto& traj : population) {
    if (traj.slots.empty()) continue;
    const auto ranked = ranked_counts(traj);
    const double n = static_cast<double>(traj.slots.size());
    if (ranked.size() > sum.size()) {
      sum.resize(ranked.size(), 0.0);
      users.resize(ranked.size(), 0);
    }
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      sum[r] += static_cast<double>(ranked[r].second) / n;
      ++users[r];
    }
  }
  for (std::size_t r = 0; r < sum.size(); ++r) sum[r] /= static_cast<double>(users[r]);
  return sum;
}

std::vector<std::uint64_t> visits_per_location(std::span<const SampledTrajectory> population, std::size_t n_locations) {
  std::vector<std::uint64_t> v(n_locations, 0);
  for (const auto& traj : population) {
    for (auto l : traj.slots) {
      if (l >= n_locations) throw IndexError("location id " + std::to_string(l) + " outside the tessellation");
      ++v[l];
    }
  }
  return v;
}

std::vector<std::uint64_t> locations_per_user(std::span<const SampledTrajectory> population) {
  std::vector<std::uint64_t> out;
  out.reserve(population.size());
  for (const auto& traj : population) {
    std::vector<LocationId> s(traj.slots);
    std::sort(s.begin(), s.end());
    out.push_back(static_cast<std::uint64_t>(std::unique(s.begin(), s.end()) - s.begin()));
  }
  return out;
}

std::array<std::uint64_t, 24> trips_per_hour(std::span<const SampledTrajectory> population) {
  std::array<std::uint64_t, 24> hours{};
  for (const auto& traj : population) {
    for (std::size_t i = 1; i < traj.slots.size(); ++i) {
      if (traj.slots[i] == traj.slots[i - 1]) continue;
      const std::int64_t sec = slot_start(traj, i);
      const std::int64_t of_day = sec - floor_div(sec, kSecondsPerDay) * kSecondsPerDay;
      ++hours[static_cast<std::size_t>(of_day / 3600)];
    }
  }
  return hours;
}

std::vector<std::uint64_t> trips_per_day(std::span<const SampledTrajectory> population) {
  std::vector<std::uint64_t> out;
  for (const auto& traj : population) {
    if (traj.slots.empty()) continue;
    const std::int64_t first_day = floor_div(slot_start(traj, 0), kSecondsPerDay);
    const std::int64_t last_day = floor_div(slot_start(traj, traj.slots.size() - 1), kSecondsPerDay);
    std::vector<std::uint64_t> days(static_cast<std::size_t>(last_day - first_day + 1), 0);
    for (std::size_t i = 1; i < traj.slots.size(); ++i) {
      if (traj.slots[i] == traj.slots[i - 1]) continue;
      ++days[static_cast<std::size_t>(floor_div(slot_start(traj, i), kSecondsPerDay) - first_day)];
    }
    out.insert(out.end(), days.begin(), days.end());
  }
  return out;
}

std::vector<double> stay_times(std::span<const SampledTrajectory> population) {
  std::vector<double> out;
  for (const auto& traj : population) {
    const double slot_hours = static_cast<double>(traj.slot_seconds) / 3600.0;
    std::size_t run = 0;
    for (std::size_t i = 0; i < traj.slots.size(); ++i) {
      ++run;
      if (i + 1 == traj.slots.size() || traj.slots[i + 1] != traj.slots[i]) {
        out.push_back(static_cast<double>(run) * slot_hours);
        run = 0;
      }
    }
  }
  return out;
}

MeasureSamples measure_samples(MeasureKind kind, std::span<const SampledTrajectory> population,
                               const WeightedTessellation& t) {
  MeasureSamples s;
  switch (kind) {
    case MeasureKind::trip_distance:
      for (const auto& traj : population) {
        const auto d = trip_distances(traj, t);
        s.values.insert(s.values.end(), d.begin(), d.end());
      }
      break;
    case MeasureKind::radius_of_gyration:
      for (const auto& traj : population) s.values.push_back(radius_of_gyration(traj, t));
      break;
    case MeasureKind::mobility_entropy:
      for (const auto& traj : population) s.values.push_back(mobility_entropy(traj));
      break;
    case MeasureKind::location_frequency: {
      const auto f = location_frequency_by_rank(population);
      for (std::size_t r = 0; r < f.size(); ++r) {
        s.values.push_back(static_cast<double>(r + 1));
        s.weights.push_back(f[r]);
      }
      break;
    }
    case MeasureKind::visits_per_location:
      for (auto v : visits_per_location(population, t.size())) {
        if (v > 0) s.values.push_back(static_cast<double>(v));
      }
      break;
    case MeasureKind::locations_per_user:
      for (auto n : locations_per_user(population)) s.values.push_back(static_cast<double>(n));
      break;
    case MeasureKind::trips_per_hour: {
      const auto h = trips_per_hour(population);
      for (std::size_t i = 0; i < h.size(); ++i) {
        s.values.push_back(static_cast<double>(i));
        s.weights.push_back(static_cast<double>(h[i]));
      }
      break;
    }
    case MeasureKind::stay_time:
      s.values = stay_times(population);
      break;
    case MeasureKind::trips_per_day:
      for (auto d : trips_per_day(population)) s.values.push_back(static_cast<double>(d));
      break;
  }
  return s;
}

MeasureDistribution measure_distribution(MeasureKind kind, std::span<const SampledTrajectory> population,
                                         const WeightedTessellation& t) {
  const auto s = measure_samples(kind, population, t);
  return build_weighted_distribution(s.values, s.weights, kind, default_scheme(kind));
}

}  // namespace ditras
