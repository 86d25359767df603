#include "ditras/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "ditras/errors.hpp"
#include "ditras/io.hpp"

namespace ditras {

namespace {

// Spreads every bin of `d` over the lattice of `scheme`.
std::vector<std::pair<std::int64_t, double>> project(const MeasureDistribution& d, const BinningScheme& scheme) {
  std::vector<std::pair<std::int64_t, double>> out;
  for (std::size_t i = 0; i < d.bins(); ++i) {
    const double m = d.mass(i);
    if (!(m > 0.0)) continue;
    const double a = d.edges[i];
    const double b = d.edges[i + 1];
    const double pad = 1e-9 * (b - a);
    if (scheme.kind == Binning::log && a <= 0.0) {
      if (b <= 0.0) continue;
      out.emplace_back(scheme.bin_index(b - pad), m);
      continue;
    }
    const std::int64_t lo = scheme.bin_index(a + pad);
    const std::int64_t hi = scheme.bin_index(b - pad);
    if (lo == hi) {
      out.emplace_back(lo, m);
      continue;
    }
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double overlap = std::min(b, scheme.edge(k + 1)) - std::max(a, scheme.edge(k));
      if (overlap > 0.0) out.emplace_back(k, m * overlap / (b - a));
    }
  }
  return out;
}

constexpr std::string_view short_label(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::trip_distance: return "dr";
    case MeasureKind::radius_of_gyration: return "rg";
    case MeasureKind::mobility_entropy: return "Sunc";
    case MeasureKind::location_frequency: return "f(L)";
    case MeasureKind::visits_per_location: return "V";
    case MeasureKind::locations_per_user: return "Nu";
    case MeasureKind::trips_per_hour: return "T";
    case MeasureKind::stay_time: return "dt";
    case MeasureKind::trips_per_day: return "D";
  }
  return "?";
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

SharedBins align_distributions(const MeasureDistribution& reference, const MeasureDistribution& synthetic) {
  const BinningScheme& scheme = reference.scheme;
  const auto ref = project(reference, scheme);
  const auto syn = project(synthetic, scheme);
  if (ref.empty() && syn.empty()) throw IncomparableDistributionsError("both distributions are empty");

  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto* side : {&ref, &syn}) {
    for (const auto& [k, m] : *side) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  }
  SharedBins out;
  const auto n = static_cast<std::size_t>(hi - lo + 1);
  out.reference.assign(n, 0.0);
  out.synthetic.assign(n, 0.0);
  for (std::int64_t k = lo; k <= hi + 1; ++k) out.edges.push_back(scheme.edge(k));
  for (const auto& [k, m] : ref) out.reference[static_cast<std::size_t>(k - lo)] += m;
  for (const auto& [k, m] : syn) out.synthetic[static_cast<std::size_t>(k - lo)] += m;
  return out;
}

namespace {

SharedBins comparable_bins(const MeasureDistribution& real, const MeasureDistribution& synth) {
  SharedBins bins = align_distributions(real, synth);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins.reference[i] > 0.0 && bins.synthetic[i] > 0.0) return bins;
  }
  throw IncomparableDistributionsError("distributions of " + std::string(measure_name(real.kind)) +
                                       " have disjoint supports");
}

}  // namespace

double rmse(const MeasureDistribution& real, const MeasureDistribution& synth) {
  const SharedBins bins = comparable_bins(real, synth);
  double acc = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double w = bins.width(i);
    const double diff = bins.synthetic[i] / w - bins.reference[i] / w;
    acc += diff * diff;
  }
  return std::sqrt(acc / static_cast<double>(bins.size()));
}

double kl_divergence(const MeasureDistribution& real, const MeasureDistribution& synth) {
  const SharedBins bins = comparable_bins(real, synth);
  double p_total = 0.0;
  double q_total = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    p_total += bins.reference[i] + kKlSmoothing;
    q_total += bins.synthetic[i] + kKlSmoothing;
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double p = (bins.reference[i] + kKlSmoothing) / p_total;
    const double q = (bins.synthetic[i] + kKlSmoothing) / q_total;
    kl += p * std::log(p / q);
  }
  // Rounding can leave a tiny negative residue for identical inputs.
  return std::max(kl, 0.0);
}

double uncovered_reference_mass(const MeasureDistribution& real, const MeasureDistribution& synth) {
  const SharedBins bins = align_distributions(real, synth);
  double total = 0.0;
  double uncovered = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    total += bins.reference[i];
    if (!(bins.synthetic[i] > 0.0)) uncovered += bins.reference[i];
  }
  return total > 0.0 ? uncovered / total : 1.0;
}

std::vector<std::optional<MeasureDistribution>> all_distributions(std::span<const SampledTrajectory> population,
                                                                  const WeightedTessellation& t) {
  std::vector<std::optional<MeasureDistribution>> out;
  out.reserve(kAllMeasures.size());
  for (auto kind : kAllMeasures) {
    try {
      out.emplace_back(measure_distribution(kind, population, t));
    } catch (const EmptyDistributionError&) {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

FitCell compare_cell(const std::string& model, MeasureKind measure, const std::optional<MeasureDistribution>& reference,
                     const std::optional<MeasureDistribution>& synthetic) {
  FitCell cell;
  cell.model = model;
  cell.measure = measure;
  if (!reference || !synthetic) return cell;
  if (uncovered_reference_mass(*reference, *synthetic) > 0.5) return cell;
  try {
    cell.rmse = rmse(*reference, *synthetic);
    cell.kl = kl_divergence(*reference, *synthetic);
    cell.comparable = true;
  } catch (const IncomparableDistributionsError&) {
    cell.comparable = false;
  }
  return cell;
}

FitReport scorecard(std::span<const LabeledPopulation> models, std::span<const SampledTrajectory> reference,
                    const WeightedTessellation& t) {
  if (models.empty()) throw ConfigError("scorecard needs at least one model");
  const auto ref = all_distributions(reference, t);
  FitReport report;
  for (const auto& m : models) {
    report.models.push_back(m.name);
    const auto syn = all_distributions(m.trajectories, t);
    for (std::size_t k = 0; k < kAllMeasures.size(); ++k) {
      report.cells.push_back(compare_cell(m.name, kAllMeasures[k], ref[k], syn[k]));
    }
  }
  report.best.resize(kAllMeasures.size());
  for (std::size_t k = 0; k < kAllMeasures.size(); ++k) {
    const FitCell* best = nullptr;
    for (std::size_t m = 0; m < report.models.size(); ++m) {
      const FitCell& c = report.cell(m, k);
      if (!c.comparable) continue;
      if (best == nullptr || c.rmse < best->rmse || (c.rmse == best->rmse && c.model < best->model)) best = &c;
    }
    if (best != nullptr) report.best[k] = best->model;
  }
  return report;
}

void write_scorecard_csv(std::ostream& out, const FitReport& report) {
  out << "model,measure,rmse,kl,comparable\n";
  for (const auto& c : report.cells) {
    out << c.model << ',' << measure_name(c.measure) << ',';
    if (c.comparable) {
      out << format_double(c.rmse) << ',' << format_double(c.kl) << ",true\n";
    } else {
      out << "-,-,false\n";
    }
  }
}

void write_scorecard_table(std::ostream& out, const FitReport& report) {
  const std::size_t n_measures = kAllMeasures.size();
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"model", "error"};
  for (auto kind : kAllMeasures) header.emplace_back(short_label(kind));
  rows.push_back(header);
  for (std::size_t m = 0; m < report.models.size(); ++m) {
    for (int metric = 0; metric < 2; ++metric) {
      std::vector<std::string> row{metric == 0 ? report.models[m] : "", metric == 0 ? "rmse" : "kl"};
      for (std::size_t k = 0; k < n_measures; ++k) {
        const FitCell& c = report.cell(m, k);
        if (!c.comparable) {
          row.emplace_back("-");
          continue;
        }
        std::string v = fixed4(metric == 0 ? c.rmse : c.kl);
        if (metric == 0 && report.best[k] && *report.best[k] == c.model) v += '*';
        row.push_back(std::move(v));
      }
      rows.push_back(std::move(row));
    }
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) line += "  ";
      const std::size_t pad = widths[i] - row[i].size();
      if (i < 2) {
        line += row[i];
        line.append(pad, ' ');
      } else {
        line.append(pad, ' ');
        line += row[i];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
}

}  // namespace ditras
