#pragma once

// Independent reference implementations used to check the library. They are
// written for clarity rather than speed and share no code with src/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <tuple>
#include <vector>

#include "ditras/engine.hpp"
#include "ditras/tessellation.hpp"

namespace oracle {

inline constexpr double kRadiusKm = 6371.0088;

/// Great-circle distance via the atan2 (Vincenty, spherical) form.
inline double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
  const double d2r = std::numbers::pi / 180.0;
  const double p1 = lat1 * d2r, p2 = lat2 * d2r, dl = (lon2 - lon1) * d2r;
  const double num = std::hypot(std::cos(p2) * std::sin(dl),
                                std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl));
  const double den = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return kRadiusKm * std::atan2(num, den);
}

inline double dist(const ditras::Location& a, const ditras::Location& b, ditras::CoordinateSystem cs) {
  if (cs == ditras::CoordinateSystem::planar) return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y));
  return great_circle_km(a.x, a.y, b.x, b.y);
}

/// Key of a diary transition count: (from phase, from routine flag, column)
/// where column 0 is "routine next slot" and column tau >= 1 a stay of tau slots.
using MdlKey = std::tuple<std::uint32_t, int, std::uint32_t>;

/// Literal evaluation of the four Kronecker-delta transition formulas at
/// every slot h of one trajectory. delta(x) = [a_x == w_x] and
/// hat(x) = [a_x == a_{x+1}]; terms that would read past the last slot are
/// zero. Stays longer than the period are recorded at tau = period.
inline void mdl_delta_counts(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& w,
                             std::int64_t first_abs_slot, std::uint32_t period, std::map<MdlKey, std::uint64_t>& out) {
  const std::size_t n = a.size();
  auto delta = [&](std::size_t x) { return a[x] == w[x] ? 1 : 0; };
  auto hat = [&](std::size_t x) { return a[x] == a[x + 1] ? 1 : 0; };
  auto phase = [&](std::size_t x) {
    const std::int64_t p = static_cast<std::int64_t>(period);
    return static_cast<std::uint32_t>((((first_abs_slot + static_cast<std::int64_t>(x)) % p) + p) % p);
  };
  for (std::size_t h = 0; h + 1 < n; ++h) {
    const int dh = delta(h);
    const int dh1 = delta(h + 1);
    if (dh == 1 && dh1 == 1) ++out[{phase(h), 1, 0}];
    if (dh == 0 && dh1 == 1) ++out[{phase(h), 0, 0}];
    // Stays: the factor prod_{i=1}^{tau-1} hat(h+i) * (1 - hat(h+tau)) selects
    // the unique tau for which slots h+1..h+tau hold one location and h+tau+1 differs.
    for (std::size_t tau = 1; h + tau + 1 < n; ++tau) {
      int prod = 1;
      for (std::size_t i = 1; i <= tau - 1; ++i) prod *= hat(h + i);
      const int term = prod * (1 - hat(h + tau));
      if (term == 0) continue;
      const auto col = static_cast<std::uint32_t>(std::min<std::size_t>(tau, period));
      if (dh == 1 && dh1 == 0) ++out[{phase(h), 1, col}];
      if (dh == 0 && dh1 == 0 && hat(h) == 0) ++out[{phase(h), 0, col}];
    }
  }
}

/// Textbook full-matrix edit distance.
inline std::size_t edit_distance(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    }
  }
  return d[a.size()][b.size()];
}

/// Radius of gyration straight from its definition: frequency-weighted mean
/// coordinates, then the root of the weighted mean squared distance.
inline double radius_of_gyration(const std::vector<std::uint32_t>& slots, const ditras::WeightedTessellation& t) {
  if (slots.empty()) return 0.0;
  ditras::Location cm{0.0, 0.0, 0.0};
  for (auto l : slots) {
    cm.x += t.locations()[l].x / static_cast<double>(slots.size());
    cm.y += t.locations()[l].y / static_cast<double>(slots.size());
  }
  std::set<std::uint32_t> distinct(slots.begin(), slots.end());
  if (distinct.size() < 2) return 0.0;
  double acc = 0.0;
  for (auto l : slots) {
    const double d = dist(t.locations()[l], cm, t.coordinate_system());
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(slots.size()));
}

inline double entropy(const std::vector<std::uint32_t>& slots) {
  std::map<std::uint32_t, double> p;
  for (auto l : slots) p[l] += 1.0 / static_cast<double>(slots.size());
  if (p.size() < 2) return 0.0;
  double h = 0.0;
  for (const auto& [l, q] : p) h += q * std::log2(1.0 / q);
  return h / std::log2(static_cast<double>(p.size()));
}

/// Brute-force versions of the population measures, written slot by slot.
namespace brute {

inline std::int64_t mod(std::int64_t a, std::int64_t b) { return ((a % b) + b) % b; }

inline std::vector<double> trip_distances(const ditras::SampledTrajectory& p, const ditras::WeightedTessellation& t) {
  std::vector<double> out;
  for (std::size_t i = 1; i < p.slots.size(); ++i) {
    if (p.slots[i] != p.slots[i - 1]) out.push_back(dist(t.locations()[p.slots[i - 1]], t.locations()[p.slots[i]], t.coordinate_system()));
  }
  return out;
}

inline std::vector<double> rank_frequencies(const std::vector<ditras::SampledTrajectory>& pop) {
  std::vector<std::vector<double>> per_rank;
  for (const auto& p : pop) {
    std::map<std::uint32_t, double> c;
    for (auto l : p.slots) c[l] += 1;
    std::vector<double> f;
    for (const auto& [l, n] : c) f.push_back(n / static_cast<double>(p.slots.size()));
    std::sort(f.rbegin(), f.rend());
    for (std::size_t r = 0; r < f.size(); ++r) {
      if (per_rank.size() <= r) per_rank.emplace_back();
      per_rank[r].push_back(f[r]);
    }
  }
  std::vector<double> out;
  for (const auto& v : per_rank) {
    double s = 0;
    for (double x : v) s += x;
    out.push_back(s / static_cast<double>(v.size()));
  }
  return out;
}

inline std::map<std::uint32_t, std::uint64_t> visits(const std::vector<ditras::SampledTrajectory>& pop) {
  std::map<std::uint32_t, std::uint64_t> v;
  for (const auto& p : pop) for (auto l : p.slots) ++v[l];
  return v;
}

inline std::vector<std::uint64_t> distinct_locations(const std::vector<ditras::SampledTrajectory>& pop) {
  std::vector<std::uint64_t> out;
  for (const auto& p : pop) out.push_back(std::set<std::uint32_t>(p.slots.begin(), p.slots.end()).size());
  return out;
}

inline std::vector<std::uint64_t> trips_by_hour(const std::vector<ditras::SampledTrajectory>& pop) {
  std::vector<std::uint64_t> h(24, 0);
  for (const auto& p : pop) {
    for (std::size_t i = 1; i < p.slots.size(); ++i) {
      if (p.slots[i] == p.slots[i - 1]) continue;
      const std::int64_t start = p.start_epoch + static_cast<std::int64_t>(i) * p.slot_seconds;
      ++h[static_cast<std::size_t>(mod(start, 86400) / 3600)];
    }
  }
  return h;
}

inline std::vector<std::uint64_t> trips_by_day(const std::vector<ditras::SampledTrajectory>& pop) {
  std::vector<std::uint64_t> out;
  for (const auto& p : pop) {
    if (p.slots.empty()) continue;
    auto day_of = [&](std::size_t i) {
      const std::int64_t s = p.start_epoch + static_cast<std::int64_t>(i) * p.slot_seconds;
      return (s - mod(s, 86400)) / 86400;
    };
    for (std::int64_t d = day_of(0); d <= day_of(p.slots.size() - 1); ++d) {
      std::uint64_t n = 0;
      for (std::size_t i = 1; i < p.slots.size(); ++i) n += (p.slots[i] != p.slots[i - 1] && day_of(i) == d);
      out.push_back(n);
    }
  }
  return out;
}

inline std::vector<double> stays(const std::vector<ditras::SampledTrajectory>& pop) {
  std::vector<double> out;
  for (const auto& p : pop) {
    std::size_t i = 0;
    while (i < p.slots.size()) {
      std::size_t j = i;
      while (j < p.slots.size() && p.slots[j] == p.slots[i]) ++j;
      out.push_back(static_cast<double>((j - i) * static_cast<std::size_t>(p.slot_seconds)) / 3600.0);
      i = j;
    }
  }
  return out;
}

}  // namespace brute

}  // namespace oracle
