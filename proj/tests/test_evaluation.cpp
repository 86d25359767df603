#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ditras/errors.hpp"
#include "ditras/evaluation.hpp"
#include "ditras/random.hpp"
#include "helpers.hpp"

using namespace ditras;
using testing::line;
using testing::traj;

namespace {

const BinningScheme kUnit = BinningScheme::linear_scale(1.0);

MeasureDistribution hist(std::vector<double> v, const BinningScheme& s = kUnit) {
  return build_distribution(v, MeasureKind::trips_per_day, s);
}

// KL with explicit smoothing, written against plain mass vectors.
double kl_oracle(std::vector<double> p, std::vector<double> q) {
  double sp = 0, sq = 0;
  for (auto& x : p) sp += (x += 1e-12);
  for (auto& x : q) sq += (x += 1e-12);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] / sp * std::log((p[i] / sp) / (q[i] / sq));
  return kl;
}

}  // namespace

TEST_CASE("identical distributions score zero") {
  const auto d = hist({0, 1, 1, 2, 7});
  CHECK(rmse(d, d) == 0.0);
  CHECK(kl_divergence(d, d) == 0.0);
  CHECK(uncovered_reference_mass(d, d) == 0.0);
}

TEST_CASE("rmse and kl: hand-computed example on the union of supports") {
  const auto ref = hist({0, 1});     // masses 0.5, 0.5 on bins 0, 1
  const auto syn = hist({1, 2, 3, 3});  // masses 0.25, 0.25, 0.5 on bins 1..3
  const auto bins = align_distributions(ref, syn);
  REQUIRE(bins.size() == 4);
  CHECK(bins.edges.front() == 0.0);
  CHECK(bins.reference == std::vector<double>{0.5, 0.5, 0, 0});
  CHECK(bins.synthetic == std::vector<double>{0, 0.25, 0.25, 0.5});
  const double want = std::sqrt((0.25 + 0.0625 + 0.0625 + 0.25) / 4.0);
  CHECK(rmse(ref, syn) == doctest::Approx(want).epsilon(1e-12));
  CHECK(kl_divergence(ref, syn) == doctest::Approx(kl_oracle({0.5, 0.5, 0, 0}, {0, 0.25, 0.25, 0.5})).epsilon(1e-9));
  CHECK(uncovered_reference_mass(ref, syn) == doctest::Approx(0.5));
}

TEST_CASE("disjoint supports are incomparable") {
  const auto a = hist({0, 1});
  const auto b = hist({5, 6});
  CHECK_THROWS_AS(rmse(a, b), IncomparableDistributionsError);
  CHECK_THROWS_AS(kl_divergence(a, b), IncomparableDistributionsError);
  CHECK_FALSE(compare_cell("m", MeasureKind::trips_per_day, a, b).comparable);
}

TEST_CASE("rebinning onto the reference lattice spreads mass by overlap") {
  // Synthetic on half-width bins: [0,0.5) and [1.5,2) carry half each.
  const auto ref = hist({0.2, 1.7});
  const auto syn = hist({0.1, 1.6}, BinningScheme::linear_scale(0.5));
  const auto bins = align_distributions(ref, syn);
  CHECK(bins.synthetic == std::vector<double>{0.5, 0.5});
  CHECK(rmse(ref, syn) == doctest::Approx(0.0).epsilon(1e-12));

  // A coarse bin [0,2) split over two unit bins.
  const auto coarse = hist({0.5}, BinningScheme::linear_scale(2.0));
  const auto cb = align_distributions(ref, coarse);
  CHECK(cb.synthetic[0] == doctest::Approx(0.5));
  CHECK(cb.synthetic[1] == doctest::Approx(0.5));
}

TEST_CASE("alignment conserves mass, kl is non-negative, rmse is symmetric on one lattice") {
  Rng rng(21);
  for (int rep = 0; rep < 300; ++rep) {
    auto draw = [&] {
      std::vector<double> v;
      const std::size_t n = 1 + rng.below(100);
      const double shift = rng.uniform() * 5;
      for (std::size_t i = 0; i < n; ++i) v.push_back(std::exp(rng.uniform() * 4 + shift));
      return v;
    };
    const auto a = build_distribution(draw(), MeasureKind::stay_time, BinningScheme::log_scale());
    const auto b = build_distribution(draw(), MeasureKind::stay_time,
                                      rng.below(2) ? BinningScheme::log_scale() : BinningScheme::log_scale(7));
    const auto bins = align_distributions(a, b);
    double ra = 0, sb = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) ra += bins.reference[i], sb += bins.synthetic[i];
    REQUIRE(std::abs(ra - 1.0) < 1e-9);
    REQUIRE(std::abs(sb - 1.0) < 1e-9);
    bool overlap = false;
    for (std::size_t i = 0; i < bins.size(); ++i) overlap |= bins.reference[i] > 0 && bins.synthetic[i] > 0;
    if (!overlap) {
      REQUIRE(uncovered_reference_mass(a, b) == 1.0);
      REQUIRE_THROWS_AS(kl_divergence(a, b), IncomparableDistributionsError);
      continue;
    }
    REQUIRE(kl_divergence(a, b) >= 0.0);
    if (b.scheme.bins_per_decade == a.scheme.bins_per_decade) {
      REQUIRE(std::abs(rmse(a, b) - rmse(b, a)) < 1e-12);
    }
  }
}

TEST_CASE("compare_cell: missing sides and mostly uncovered references show as incomparable") {
  const auto a = hist({0, 1, 2, 3});
  CHECK_FALSE(compare_cell("m", MeasureKind::trips_per_day, std::nullopt, a).comparable);
  CHECK_FALSE(compare_cell("m", MeasureKind::trips_per_day, a, std::nullopt).comparable);
  // Synthetic covers one of four reference bins: 75% uncovered.
  CHECK_FALSE(compare_cell("m", MeasureKind::trips_per_day, a, hist({0})).comparable);
  // Two of four covered: exactly half uncovered is still comparable.
  CHECK(compare_cell("m", MeasureKind::trips_per_day, a, hist({0, 1})).comparable);
}

TEST_CASE("scorecard: best model, ties, CSV and table output") {
  const auto t = line({0, 1, 2, 4, 8});
  const std::vector<SampledTrajectory> ref{traj({0, 0, 1, 1, 2, 0, 0, 3}), traj({4, 4, 4, 0, 1, 0, 0, 0}, 1)};
  const std::vector<SampledTrajectory> far{traj({0, 4, 0, 4, 0, 4, 0, 4}), traj({1, 3, 1, 3, 1, 3, 1, 3}, 1)};
  const std::vector<LabeledPopulation> models{{"zeta", ref}, {"alpha", ref}, {"far", far}};
  const auto report = scorecard(models, ref, t);
  REQUIRE(report.models.size() == 3);
  REQUIRE(report.cells.size() == 27);
  for (std::size_t k = 0; k < kAllMeasures.size(); ++k) {
    CHECK(report.cell(0, k).comparable);
    CHECK(report.cell(0, k).rmse == 0.0);
    CHECK(report.best[k] == std::optional<std::string>("alpha"));
  }

  std::ostringstream csv;
  write_scorecard_csv(csv, report);
  const std::string text = csv.str();
  CHECK(text.rfind("model,measure,rmse,kl,comparable\n", 0) == 0);
  CHECK(text.find("alpha,trip_distance,0,0,true\n") != std::string::npos);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == 28);

  std::ostringstream table;
  write_scorecard_table(table, report);
  const std::string tt = table.str();
  CHECK(tt.find("Sunc") != std::string::npos);
  CHECK(tt.find("0.0000*") != std::string::npos);

  CHECK_THROWS_AS(scorecard(std::vector<LabeledPopulation>{}, ref, t), ConfigError);
}
