#include <algorithm>
#include <map>
#include <vector>

#include "doctest.h"
#include "ditras/errors.hpp"
#include "ditras/ingestion.hpp"
#include "ditras/random.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace ditras;

namespace {

constexpr double kA = 1.0, kB = 2.0, kC = 3.0;

RawRecord rec(double loc, std::int64_t t, const std::string& user = "u") { return {user, loc, 0.0, t}; }

}  // namespace

TEST_CASE("assign_slots reproduces the hourly worked example") {
  // Slots: A | A | - | - | B | C C B B
  const std::vector<RawRecord> r{rec(kA, 100),       rec(kA, 3600 + 5),    rec(kB, 4 * 3600 + 10),
                                 rec(kC, 5 * 3600 + 1), rec(kC, 5 * 3600 + 2), rec(kB, 5 * 3600 + 3),
                                 rec(kB, 5 * 3600 + 4)};
  const auto traj = assign_slots(r, 3600);
  // A gets id 0, B id 1, C id 2 (first appearance).
  CHECK(traj.slots == std::vector<std::uint32_t>{0, 0, 0, 0, 1, 1});
  CHECK(traj.start_slot_epoch == 0);
  CHECK(traj.slot_seconds == 3600);
}

TEST_CASE("assign_slots: single record gives a one-slot trajectory") {
  const std::vector<RawRecord> r{rec(kA, 7 * 3600 + 12)};
  const auto traj = assign_slots(r, 3600);
  CHECK(traj.slots == std::vector<std::uint32_t>{0});
  CHECK(traj.start_slot_epoch == 7 * 3600);
  CHECK(traj.first_absolute_slot() == 7);
}

TEST_CASE("assign_slots: full tie goes to the smaller id, deterministically") {
  // Slot 0 has B then C once each; overall B and C both appear twice.
  const std::vector<RawRecord> r{rec(kB, 1), rec(kC, 2), rec(kB, 3600 + 1), rec(kC, 7200 + 1)};
  const auto a = assign_slots(r, 3600);
  const auto b = assign_slots(r, 3600);
  CHECK(a.slots.front() == 0);
  CHECK(a.slots == b.slots);
}

TEST_CASE("assign_slots: overall frequency breaks within-slot ties") {
  const std::vector<RawRecord> r{rec(kB, 1), rec(kC, 2), rec(kC, 3600 + 1)};
  CHECK(assign_slots(r, 3600).slots.front() == 1);
}

TEST_CASE("assign_slots errors") {
  CHECK_THROWS_AS(assign_slots(std::vector<RawRecord>{}, 3600), EmptyUserError);
  const std::vector<RawRecord> r{rec(kA, 10)};
  CHECK_THROWS_AS(assign_slots(r, 0), ConfigError);
  const std::vector<RawRecord> unsorted{rec(kA, 10), rec(kB, 5)};
  CHECK_THROWS_AS(assign_slots(unsorted, 3600), DataError);
}

TEST_CASE("assign_slots: dwell weighting prefers the longer stay") {
  // Three quick records at A, then B held for the rest of the slot.
  const std::vector<RawRecord> r{rec(kA, 0), rec(kA, 10), rec(kA, 20), rec(kB, 30), rec(kB, 3600 + 10)};
  CHECK(assign_slots(r, 3600, SlotWeighting::record_count).slots.front() == 0);
  CHECK(assign_slots(r, 3600, SlotWeighting::dwell_time).slots.front() == 1);
}

TEST_CASE("assign_slots: length spans first to last observation and no slot is empty") {
  Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<RawRecord> r;
    std::int64_t t = static_cast<std::int64_t>(rng.below(100000));
    const std::size_t n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      t += static_cast<std::int64_t>(rng.below(9000));
      r.push_back(rec(static_cast<double>(rng.below(4)), t));
    }
    const auto traj = assign_slots(r, 1800);
    const auto first = r.front().timestamp / 1800;
    const auto last = r.back().timestamp / 1800;
    REQUIRE(traj.slots.size() == static_cast<std::size_t>(last - first + 1));
    REQUIRE(traj.start_slot_epoch == first * 1800);
    // Every slot holding records holds one of them; empty slots copy the previous slot.
    std::map<std::int64_t, std::vector<double>> per_slot;
    for (const auto& x : r) per_slot[x.timestamp / 1800].push_back(x.x);
    for (std::int64_t s = first; s <= last; ++s) {
      const std::size_t i = static_cast<std::size_t>(s - first);
      if (per_slot.count(s) == 0) REQUIRE(traj.slots[i] == traj.slots[i - 1]);
    }
  }
}

TEST_CASE("assign_slots is idempotent on one-record-per-slot data") {
  Rng rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<RawRecord> r;
    const std::size_t n = 1 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) r.push_back(rec(static_cast<double>(rng.below(5)), static_cast<std::int64_t>(i) * 3600 + 7));
    const auto once = assign_slots(r, 3600);
    std::vector<RawRecord> again;
    for (std::size_t i = 0; i < once.slots.size(); ++i) {
      again.push_back(rec(static_cast<double>(once.slots[i]), static_cast<std::int64_t>(i) * 3600 + 7));
    }
    REQUIRE(assign_slots(again, 3600).slots == once.slots);
  }
}

TEST_CASE("filter_cdr_locations") {
  const auto a = filter_cdr_locations({{0, 199}, {1, 1}}, 0.005);
  CHECK(a.kept == std::map<std::uint32_t, std::uint64_t>{{0, 199}});
  CHECK(a.discard);
  const auto b = filter_cdr_locations({{0, 100}, {1, 100}}, 0.005);
  CHECK(b.kept.size() == 2);
  CHECK_FALSE(b.discard);
  const auto c = filter_cdr_locations({{0, 3}, {1, 1}, {2, 1}}, 0.0);
  CHECK(c.kept.size() == 3);
}

TEST_CASE("filter_cdr_locations never increases counts and keeps the top location") {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    std::map<std::uint32_t, std::uint64_t> counts;
    const std::size_t n = 1 + rng.below(8);
    for (std::uint32_t i = 0; i < n; ++i) counts[i] = 1 + rng.below(300);
    const double f = rng.uniform() * 0.2;
    const auto r = filter_cdr_locations(counts, f);
    std::uint64_t total = 0, top = 0;
    for (const auto& [k, v] : counts) total += v, top = std::max(top, v);
    for (const auto& [k, v] : r.kept) REQUIRE(v == counts.at(k));
    if (static_cast<double>(top) / static_cast<double>(total) > f) {
      bool kept_top = false;
      for (const auto& [k, v] : r.kept) kept_top |= v == top;
      REQUIRE(kept_top);
    }
  }
}

TEST_CASE("filter_active_users is inclusive at the threshold") {
  const auto kept = filter_active_users({{"a", 924}, {"b", 0}, {"c", 923}}, 24, 77, 0.5);
  CHECK(kept == std::set<std::string>{"a"});
  CHECK(filter_active_users({{"a", 0}, {"b", 3}}, 24, 77, 0.0).size() == 2);
  CHECK_THROWS_AS(filter_active_users({{"a", 1}}, 0, 77, 0.5), ConfigError);
}

namespace {

std::vector<GpsPoint> track(const std::vector<std::int64_t>& gaps) {
  std::vector<GpsPoint> p{{0, 0, 1000}};
  for (auto g : gaps) p.push_back({p.back().x + 1, 0, p.back().timestamp + g});
  return p;
}

// Brute-force segmentation: one trip plus one per gap above the threshold.
std::size_t oracle_trip_count(const std::vector<GpsPoint>& p, std::int64_t threshold) {
  if (p.size() < 2) return 0;
  std::size_t n = 1;
  for (std::size_t i = 1; i < p.size(); ++i) n += (p[i].timestamp - p[i - 1].timestamp > threshold) ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("segment_gps_trips: regular fixes form one trip, a long gap splits") {
  const auto one = track(std::vector<std::int64_t>(100, 30));
  const auto trips = segment_gps_trips(one, 1200);
  REQUIRE(trips.size() == 1);
  CHECK(trips[0].first_index == 0);
  CHECK(trips[0].last_index == 100);

  std::vector<std::int64_t> gaps(20, 30);
  gaps[10] = 1500;
  const auto two = segment_gps_trips(track(gaps), 1200);
  REQUIRE(two.size() == 2);
  CHECK(two[0].last_index == 10);
  CHECK(two[1].first_index == 11);
  CHECK(two[0].destination.timestamp + 1500 == two[1].origin.timestamp);

  CHECK(segment_gps_trips(track({}), 1200).empty());
  CHECK_THROWS_AS(segment_gps_trips(track({30}), 0), ConfigError);
}

TEST_CASE("segment_gps_trips: counts match the oracle and are nonincreasing in the threshold") {
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::int64_t> gaps;
    for (int i = 0; i < 200; ++i) gaps.push_back(rng.below(4) == 0 ? static_cast<std::int64_t>(rng.below(3000)) : 30);
    const auto p = track(gaps);
    std::size_t prev = SIZE_MAX;
    for (std::int64_t th : {300, 600, 900, 1200, 1800, 2400}) {
      const auto trips = segment_gps_trips(p, th);
      REQUIRE(trips.size() == oracle_trip_count(p, th));
      REQUIRE(trips.size() <= prev);
      prev = trips.size();
      // Trip intervals plus the gaps between them reconstruct the span.
      std::int64_t covered = 0;
      for (std::size_t k = 0; k < trips.size(); ++k) {
        covered += trips[k].destination.timestamp - trips[k].origin.timestamp;
        if (k > 0) covered += trips[k].origin.timestamp - trips[k - 1].destination.timestamp;
      }
      REQUIRE(covered == p.back().timestamp - p.front().timestamp);
    }
  }
}

TEST_CASE("snap_to_tessellation: exact hit, tie to smaller id, oracle scan") {
  const auto t = testing::planar({{0, 0, 1}, {10, 0, 1}, {4, 0, 1}, {9, 9, 1}, {-3, 3, 1}, {8, 0, 1}});
  CHECK(snap_to_tessellation(9, 9, t) == 3);
  CHECK(snap_to_tessellation(6, 0, t) == 2);  // equidistant from ids 2 and 5
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform() * 20 - 5, y = rng.uniform() * 20 - 5;
    LocationId best = 0;
    double bd = 1e300;
    for (LocationId k = 0; k < t.size(); ++k) {
      const double d = oracle::dist(t.locations()[k], {x, y, 0}, CoordinateSystem::planar);
      if (d < bd) bd = d, best = k;
    }
    REQUIRE(snap_to_tessellation(x, y, t) == best);
  }
}

TEST_CASE("keep_vehicle and calendar_days") {
  CHECK(keep_vehicle(7, 7.0));
  CHECK_FALSE(keep_vehicle(6, 7.0));
  CHECK(calendar_days(0, 86399) == 1.0);
  CHECK(calendar_days(86399, 86400) == 2.0);
  CHECK(calendar_days(-1, 0) == 2.0);
}

TEST_CASE("build_abstract_corpus: CDR filters") {
  std::vector<RawRecord> r;
  // "busy" calls every 30 minutes for 2 days between two towers; "quiet" calls once.
  for (int i = 0; i < 96; ++i) r.push_back({"busy", (i / 4) % 2 == 0 ? kA : kB, 0, i * 1800});
  r.push_back({"quiet", kA, 0, 50});
  CorpusOptions opt;
  const auto corpus = build_abstract_corpus(r, opt);
  REQUIRE(corpus.size() == 1);
  CHECK(corpus[0].user == "busy");
  CHECK(corpus[0].slots.size() == 48);

  opt.min_call_rate = 100.0;
  CHECK_THROWS_AS(build_abstract_corpus(r, opt), EmptyCorpusError);
  CHECK_THROWS_AS(build_abstract_corpus(std::vector<RawRecord>{}, CorpusOptions{}), EmptyCorpusError);
}

TEST_CASE("build_abstract_corpus: GPS trips become stays at their endpoints") {
  std::vector<RawRecord> r;
  std::int64_t t = 0;
  // Two days, two trips per day: home -> work -> home.
  for (int day = 0; day < 2; ++day) {
    t = day * 86400 + 8 * 3600;
    for (int i = 0; i <= 20; ++i) r.push_back({"car", kA + i * 0.05, 0, t + i * 30});
    t = day * 86400 + 18 * 3600;
    for (int i = 0; i <= 20; ++i) r.push_back({"car", kB - i * 0.05, 0, t + i * 30});
  }
  CorpusOptions opt;
  opt.gps = true;
  opt.weighting = SlotWeighting::dwell_time;
  const auto corpus = build_abstract_corpus(r, opt);
  REQUIRE(corpus.size() == 1);
  const auto& s = corpus[0].slots;
  CHECK(corpus[0].first_absolute_slot() == 8);
  // 08:00 leaves home and reaches 2.0 (id 1) within the slot.
  CHECK(s.front() == 1);
  CHECK(std::set<std::uint32_t>(s.begin(), s.end()).size() == 2);

  opt.min_trips_per_day = 3.0;
  CHECK_THROWS_AS(build_abstract_corpus(r, opt), EmptyCorpusError);
}
