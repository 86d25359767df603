#include "ditras/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>
#include <unordered_map>

#include "ditras/errors.hpp"

namespace ditras {

TypicalWeek extract_typical_week(const AbstractTrajectory& trajectory) {
  if (trajectory.slot_seconds != 3600) throw ConfigError("typical weeks need hourly slots");
  if (trajectory.slots.size() < kHoursPerWeek) {
    throw InsufficientHistoryError("user " + trajectory.user + " has fewer than 168 slots");
  }
  std::unordered_map<std::uint32_t, std::uint64_t> overall;
  for (auto l : trajectory.slots) ++overall[l];

  std::vector<std::map<std::uint32_t, std::uint64_t>> per_hour(kHoursPerWeek);
  const std::int64_t first = trajectory.first_absolute_slot();
  const auto week = static_cast<std::int64_t>(kHoursPerWeek);
  for (std::size_t i = 0; i < trajectory.slots.size(); ++i) {
    const std::int64_t abs_slot = first + static_cast<std::int64_t>(i);
    const auto h = static_cast<std::size_t>(((abs_slot % week) + week) % week);
    ++per_hour[h][trajectory.slots[i]];
  }

  TypicalWeek out;
  out.user = trajectory.user;
  out.slots.resize(kHoursPerWeek);
  for (std::size_t h = 0; h < kHoursPerWeek; ++h) {
    std::uint32_t best = 0;
    std::uint64_t best_n = 0;
    std::uint64_t best_overall = 0;
    bool have = false;
    // std::map iterates ids ascending, so strict comparisons keep the smaller id on full ties.
    for (const auto& [l, n] : per_hour[h]) {
      const std::uint64_t o = overall[l];
      if (!have || n > best_n || (n == best_n && o > best_overall)) {
        best = l;
        best_n = n;
        best_overall = o;
        have = true;
      }
    }
    out.slots[h] = best;
  }
  return out;
}

std::vector<std::uint32_t> canonical_symbols(std::span<const std::uint32_t> symbols) {
  std::unordered_map<std::uint32_t, std::uint32_t> relabel;
  std::vector<std::uint32_t> out;
  out.reserve(symbols.size());
  for (auto s : symbols) {
    auto it = relabel.try_emplace(s, static_cast<std::uint32_t>(relabel.size())).first;
    out.push_back(it->second);
  }
  return out;
}

TypicalWeek canonical_week(const TypicalWeek& week) { return {week.user, canonical_symbols(week.slots)}; }

std::size_t levenshtein(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

DistanceMatrix::DistanceMatrix(std::size_t n) : n_(n), d_(n > 1 ? n * (n - 1) / 2 : 0, 0.0) {}

std::size_t DistanceMatrix::slot(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  // Row i of the strict upper triangle starts after i*(2n-i-1)/2 entries.
  return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
}

double DistanceMatrix::operator()(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw IndexError("distance index out of range");
  return i == j ? 0.0 : d_[slot(i, j)];
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double d) {
  if (i >= n_ || j >= n_) throw IndexError("distance index out of range");
  if (i == j) return;
  d_[slot(i, j)] = d;
}

DistanceMatrix pairwise_levenshtein(std::span<const TypicalWeek> weeks, unsigned threads) {
  const std::size_t n = weeks.size();
  DistanceMatrix out(n);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  auto rows = [&](unsigned w) {
    for (std::size_t i = w; i < n; i += workers) {
      for (std::size_t j = i + 1; j < n; ++j) out.set(i, j, static_cast<double>(levenshtein(weeks[i], weeks[j])));
    }
  };
  if (workers == 1) {
    rows(0);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(rows, w);
  for (auto& th : pool) th.join();
  return out;
}

std::vector<int> dbscan(const DistanceMatrix& distances, double eps, std::size_t min_pts) {
  if (!(eps >= 0.0)) throw ConfigError("eps must be non-negative");
  if (min_pts < 1) throw ConfigError("min_pts must be at least 1");
  const std::size_t n = distances.size();
  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);

  auto neighbors = [&](std::size_t p) {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < n; ++q) {
      if (distances(p, q) <= eps) out.push_back(q);
    }
    return out;
  };

  int cluster = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (label[p] != kUnvisited) continue;
    auto seeds = neighbors(p);
    if (seeds.size() < min_pts) {
      label[p] = kNoise;
      continue;
    }
    label[p] = cluster;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const std::size_t q = seeds[s];
      if (label[q] == kNoise) label[q] = cluster;
      if (label[q] != kUnvisited) continue;
      label[q] = cluster;
      auto more = neighbors(q);
      if (more.size() >= min_pts) seeds.insert(seeds.end(), more.begin(), more.end());
    }
    ++cluster;
  }
  return label;
}

std::vector<int> dbscan(std::span<const TypicalWeek> weeks, double eps, std::size_t min_pts) {
  return dbscan(pairwise_levenshtein(weeks), eps, min_pts);
}

std::vector<std::size_t> cluster_sizes(std::span<const int> labels) {
  std::vector<std::size_t> sizes;
  for (int l : labels) {
    if (l < 0) continue;
    if (static_cast<std::size_t>(l) >= sizes.size()) sizes.resize(static_cast<std::size_t>(l) + 1, 0);
    ++sizes[static_cast<std::size_t>(l)];
  }
  return sizes;
}

std::vector<std::optional<double>> silhouette_samples(const DistanceMatrix& distances, std::span<const int> labels) {
  const std::size_t n = distances.size();
  if (labels.size() != n) throw ConfigError("one label per point is required");
  const auto sizes = cluster_sizes(labels);
  std::vector<std::optional<double>> out(n);
  std::vector<double> sum(sizes.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0) continue;
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] == 1) {
      out[i] = 0.0;
      continue;
    }
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && labels[j] >= 0) sum[static_cast<std::size_t>(labels[j])] += distances(i, j);
    }
    const double a = sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    if (!std::isfinite(b)) continue;
    const double m = std::max(a, b);
    out[i] = m > 0.0 ? (b - a) / m : 0.0;
  }
  return out;
}

double silhouette(const DistanceMatrix& distances, std::span<const int> labels) {
  const auto sizes = cluster_sizes(labels);
  const auto clusters = std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; });
  if (clusters < 2) throw UndefinedSilhouetteError("silhouette needs at least two clusters");
  const auto samples = silhouette_samples(distances, labels);
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (!s) continue;
    acc += *s;
    ++n;
  }
  return acc / static_cast<double>(n);
}

std::vector<double> knee_profile(const DistanceMatrix& distances, std::size_t k) {
  const std::size_t n = distances.size();
  if (k < 1) throw ConfigError("neighbor index must be at least 1");
  if (n <= k) throw InsufficientPointsError("need more than " + std::to_string(k) + " points");
  std::vector<double> out;
  out.reserve(n);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(distances(i, j));
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    out.push_back(row[k - 1]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::size_t> medoid(const DistanceMatrix& distances, std::span<const int> labels, int cluster) {
  std::optional<std::size_t> best;
  double best_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != cluster) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] == cluster) s += distances(i, j);
    }
    if (!best || s < best_sum) {
      best = i;
      best_sum = s;
    }
  }
  return best;
}

}  // namespace ditras
