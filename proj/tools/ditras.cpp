// Command-line front end: learn, generate, measure, compare, cluster.

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ditras/clustering.hpp"
#include "ditras/diary.hpp"
#include "ditras/engine.hpp"
#include "ditras/errors.hpp"
#include "ditras/evaluation.hpp"
#include "ditras/ingestion.hpp"
#include "ditras/io.hpp"
#include "ditras/measures.hpp"
#include "ditras/tessellation.hpp"
#include "ditras/trajectory.hpp"

#ifndef DITRAS_VERSION
#define DITRAS_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ditras;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw DataError("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

/// Accumulates what a run did and writes it next to the outputs.
class Manifest {
 public:
  Manifest(std::string command, const CLI::App& sub) : command_(std::move(command)) {
    for (const CLI::Option* opt : sub.get_options()) {
      if (opt->get_lnames().empty()) continue;
      const std::string name = opt->get_lnames().front();
      if (name == "help") continue;
      if (opt->count() > 0) {
        const auto& results = opt->results();
        params_[name] = results.size() == 1 ? json(results.front()) : json(results);
      } else if (opt->get_expected_max() == 0) {
        params_[name] = false;
      } else if (!opt->get_default_str().empty()) {
        params_[name] = opt->get_default_str();
      } else {
        params_[name] = nullptr;
      }
    }
  }

  /// Reads an input file and records its digest.
  std::string read_input(const std::string& path) {
    std::string bytes = read_file(path);
    inputs_[path] = sha256_hex(bytes);
    return bytes;
  }

  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set_param(const std::string& name, json value) { params_[name] = std::move(value); }

  void write(const fs::path& dir) const {
    json doc;
    doc["command"] = command_;
    doc["version"] = DITRAS_VERSION;
    doc["parameters"] = params_;
    doc["inputs"] = inputs_;
    doc["seed"] = seed_ ? json(*seed_) : json(nullptr);
    doc["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    write_file_atomic(dir / "manifest.json", doc.dump(2) + "\n");
  }

 private:
  std::string command_;
  json params_ = json::object();
  json inputs_ = json::object();
  std::optional<std::uint64_t> seed_;
  std::chrono::steady_clock::time_point started_ = std::chrono::steady_clock::now();
};

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

struct TessellationArgs {
  std::string path;
  bool planar = false;
  bool merge = false;

  void add_to(CLI::App& sub) {
    sub.add_option("--tessellation", path, "Tessellation CSV")->required()->check(CLI::ExistingFile);
    sub.add_flag("--planar", planar, "Coordinates are planar x,y in km");
    sub.add_flag("--merge-coincident", merge, "Merge locations sharing coordinates");
  }

  WeightedTessellation load(Manifest& m) const {
    const auto cs = planar ? CoordinateSystem::planar : CoordinateSystem::geographic;
    auto t = parse_tessellation(m.read_input(path), cs, path);
    if (!merge) return t;
    auto merged = merge_coincident(t.locations());
    return WeightedTessellation(std::move(merged.locations), cs);
  }
};

// learn ---------------------------------------------------------------------

struct LearnArgs {
  std::string input;
  std::string out;
  std::int64_t slot_seconds = 3600;
  std::uint32_t period = 24;
  double min_location_freq = 0.005;
  double min_call_rate = 0.5;
  std::optional<double> observation_days;
  bool gps = false;
  std::int64_t stop_threshold = 1200;
  double min_trips_per_day = 1.0;
  std::string tessellation;
  bool planar = false;
  std::string weighting = "count";
};

void run_learn(const LearnArgs& a, const CLI::App& sub) {
  Manifest m("learn", sub);
  const fs::path out = prepare_out(a.out);
  const auto records = parse_raw_records(m.read_input(a.input), a.input);

  CorpusOptions opt;
  opt.slot_seconds = a.slot_seconds;
  opt.gps = a.gps;
  opt.min_location_freq = a.min_location_freq;
  opt.min_call_rate = a.min_call_rate;
  opt.observation_days = a.observation_days;
  opt.stop_threshold_seconds = a.stop_threshold;
  opt.min_trips_per_day = a.min_trips_per_day;
  opt.weighting = a.weighting == "dwell" ? SlotWeighting::dwell_time : SlotWeighting::record_count;
  std::optional<WeightedTessellation> t;
  if (!a.tessellation.empty()) {
    t.emplace(parse_tessellation(m.read_input(a.tessellation),
                                 a.planar ? CoordinateSystem::planar : CoordinateSystem::geographic, a.tessellation));
    opt.snap = &*t;
  }

  const auto corpus = build_abstract_corpus(records, opt);
  const auto model = mdl_learn(corpus, a.period);
  write_file_atomic(out / "model.json", serialize_model(model));
  write_file_atomic(out / "abstract_trajectories.csv", format_abstract_trajectories(corpus));
  m.set_param("users_kept", corpus.size());
  m.write(out);
}

// generate ------------------------------------------------------------------

struct GenerateArgs {
  TessellationArgs tess;
  std::string out;
  std::string diary = "md";
  std::string model;
  std::string trajectory = "depr";
  std::size_t agents = 1000;
  std::size_t slots = 1848;
  std::int64_t slot_seconds = 3600;
  std::int64_t start_epoch = 0;
  std::optional<std::uint64_t> seed;
  double rho = 0.6;
  double gamma = 0.21;
  double alpha = 0.75;
  double latp_exponent = 1.5;
  double beta = 0.8;
  double tau_hours = 17.0;
  unsigned threads = 1;
  std::string counting = "slot";
  bool compact = false;
};

void run_generate(const GenerateArgs& a, const CLI::App& sub) {
  Manifest m("generate", sub);
  SimulationConfig cfg;
  cfg.n_agents = a.agents;
  cfg.n_slots = a.slots;
  cfg.slot_seconds = a.slot_seconds;
  cfg.start_epoch = a.start_epoch;
  cfg.depr = {a.rho, a.gamma};
  cfg.swim_alpha = a.alpha;
  cfg.latp_exponent = a.latp_exponent;
  cfg.wt_beta = a.beta;
  cfg.wt_tau_hours = a.tau_hours;
  cfg.threads = a.threads;
  cfg.counting = a.counting == "trip" ? VisitCounting::per_trip : VisitCounting::per_slot;
  if (a.seed) {
    cfg.seed = *a.seed;
  } else {
    std::random_device rd;
    cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  m.set_seed(cfg.seed);
  m.set_param("seed", cfg.seed);
  cfg.validate();
  if (a.start_epoch % a.slot_seconds != 0) throw ConfigError("start epoch must be a multiple of the slot length");

  const fs::path out = prepare_out(a.out);
  const WeightedTessellation t = a.tess.load(m);

  std::optional<MarkovDiaryModel> model;
  std::unique_ptr<DiaryGenerator> diaries;
  if (a.diary == "md") {
    if (a.model.empty()) throw ConfigError("--diary md needs --model");
    model.emplace(parse_model(m.read_input(a.model), a.model));
    if (model->slot_seconds() != a.slot_seconds) {
      throw ConfigMismatchError("model slot length " + std::to_string(model->slot_seconds()) +
                                " differs from --slot-seconds " + std::to_string(a.slot_seconds));
    }
    const auto phase = static_cast<std::uint32_t>(((a.start_epoch / a.slot_seconds) % model->period() + model->period()) %
                                                  model->period());
    diaries = std::make_unique<MarkovDiaryGenerator>(*model, DiaryState{phase, true});
  } else if (a.diary == "rd") {
    diaries = std::make_unique<RandomDiaryGenerator>(a.slot_seconds);
  } else {
    diaries = std::make_unique<WaitingTimeDiaryGenerator>(a.beta, a.tau_hours, a.slot_seconds);
  }

  std::optional<GravityMatrix> gravity;
  std::unique_ptr<TrajectoryGenerator> trajectories;
  if (a.trajectory == "depr") {
    gravity.emplace(build_gravity_matrix(t));
    trajectories = std::make_unique<DeprGenerator>(t, *gravity, cfg.depr);
  } else if (a.trajectory == "swim") {
    trajectories = std::make_unique<SwimGenerator>(t, a.alpha);
  } else {
    trajectories = std::make_unique<LatpGenerator>(t, a.latp_exponent);
  }

  const auto population = run_ditras(*diaries, *trajectories, t, cfg);
  write_file_atomic(out / "trajectories.csv",
                    a.compact ? format_trajectories_compact(population) : format_trajectories(population, t));
  m.write(out);
}

// measure / compare -----------------------------------------------------------

struct PopulationArgs {
  std::int64_t slot_seconds = 3600;
  std::int64_t start_epoch = 0;

  void add_to(CLI::App& sub) {
    sub.add_option("--slot-seconds", slot_seconds, "Slot length in seconds")->capture_default_str();
    sub.add_option("--start-epoch", start_epoch, "Epoch second of slot 0")->capture_default_str();
  }

  std::vector<SampledTrajectory> load(Manifest& m, const std::string& path) const {
    if (slot_seconds <= 0) throw ConfigError("slot length must be positive");
    return parse_trajectories(m.read_input(path), slot_seconds, start_epoch, path);
  }
};

struct MeasureArgs {
  TessellationArgs tess;
  PopulationArgs pop;
  std::string input;
  std::string out;
  std::vector<std::string> measures;
};

void run_measure(const MeasureArgs& a, const CLI::App& sub) {
  Manifest m("measure", sub);
  std::vector<MeasureKind> kinds;
  for (const auto& name : a.measures) {
    const auto k = parse_measure(name);
    if (!k) throw ConfigError("unknown measure '" + name + "'");
    kinds.push_back(*k);
  }
  if (kinds.empty()) kinds.assign(kAllMeasures.begin(), kAllMeasures.end());

  const fs::path out = prepare_out(a.out);
  const WeightedTessellation t = a.tess.load(m);
  const auto population = a.pop.load(m, a.input);

  json summary;
  summary["agents"] = population.size();
  json per_measure = json::object();
  for (auto kind : kinds) {
    const std::string name(measure_name(kind));
    json entry;
    try {
      const auto d = measure_distribution(kind, population, t);
      write_file_atomic(out / (name + ".csv"), format_distribution(d));
      entry["sample_count"] = d.sample_count;
      entry["mean"] = d.mean;
      entry["bins"] = d.bins();
    } catch (const EmptyDistributionError&) {
      write_file_atomic(out / (name + ".csv"), "bin_left,bin_right,density\n");
      entry["sample_count"] = 0;
      entry["mean"] = nullptr;
      entry["bins"] = 0;
    }
    per_measure[name] = std::move(entry);
  }
  summary["measures"] = std::move(per_measure);
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
  m.write(out);
}

struct CompareArgs {
  TessellationArgs tess;
  PopulationArgs pop;
  std::string reference;
  std::vector<std::string> models;
  std::string out;
};

void run_compare(const CompareArgs& a, const CLI::App& sub) {
  Manifest m("compare", sub);
  std::vector<std::pair<std::string, std::string>> named;
  for (const auto& entry : a.models) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size()) {
      throw ConfigError("--model expects NAME=PATH, got '" + entry + "'");
    }
    named.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
  }
  const fs::path out = prepare_out(a.out);
  const WeightedTessellation t = a.tess.load(m);
  const auto reference = a.pop.load(m, a.reference);
  std::vector<std::vector<SampledTrajectory>> populations;
  populations.reserve(named.size());
  for (const auto& [name, path] : named) populations.push_back(a.pop.load(m, path));
  std::vector<LabeledPopulation> labeled;
  for (std::size_t i = 0; i < named.size(); ++i) labeled.push_back({named[i].first, populations[i]});

  const FitReport report = scorecard(labeled, reference, t);
  std::ostringstream csv;
  write_scorecard_csv(csv, report);
  std::ostringstream table;
  write_scorecard_table(table, report);
  write_file_atomic(out / "scorecard.csv", csv.str());
  write_file_atomic(out / "scorecard.txt", table.str());
  m.write(out);
}

// cluster -------------------------------------------------------------------

struct ClusterArgs {
  std::string input;
  std::string out;
  double eps = 70.0;
  std::size_t min_pts = 4;
  std::size_t knee_k = 4;
  unsigned threads = 1;
};

void run_cluster(const ClusterArgs& a, const CLI::App& sub) {
  Manifest m("cluster", sub);
  const fs::path out = prepare_out(a.out);
  const auto corpus = parse_abstract_trajectories(m.read_input(a.input), 3600, a.input);

  std::vector<TypicalWeek> weeks;
  std::vector<std::string> skipped;
  for (const auto& traj : corpus) {
    try {
      weeks.push_back(canonical_week(extract_typical_week(traj)));
    } catch (const InsufficientHistoryError&) {
      skipped.push_back(traj.user);
    }
  }
  if (weeks.empty()) throw InsufficientHistoryError("no user has a full week of hourly slots");

  const DistanceMatrix dist = pairwise_levenshtein(weeks, a.threads);
  const auto labels = dbscan(dist, a.eps, a.min_pts);
  const auto per_point = silhouette_samples(dist, labels);
  const auto sizes = cluster_sizes(labels);

  std::string csv = "user_id,cluster_label,silhouette\n";
  for (std::size_t i = 0; i < weeks.size(); ++i) {
    csv += weeks[i].user + ',' + std::to_string(labels[i]) + ',' + (per_point[i] ? format_double(*per_point[i]) : "NA") + '\n';
  }
  write_file_atomic(out / "clusters.csv", csv);

  std::string knee = "rank,distance\n";
  if (weeks.size() > a.knee_k) {
    const auto profile = knee_profile(dist, a.knee_k);
    for (std::size_t i = 0; i < profile.size(); ++i) knee += std::to_string(i) + ',' + format_double(profile[i]) + '\n';
  }
  write_file_atomic(out / "knee.csv", knee);

  json summary;
  summary["users"] = weeks.size();
  summary["skipped_users"] = skipped;
  summary["clusters"] = sizes.size();
  summary["noise"] = std::count(labels.begin(), labels.end(), kNoise);
  summary["cluster_sizes"] = sizes;
  try {
    summary["silhouette"] = silhouette(dist, labels);
  } catch (const UndefinedSilhouetteError&) {
    summary["silhouette"] = nullptr;
  }
  json medoids = json::array();
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const auto idx = medoid(dist, labels, static_cast<int>(c));
    if (!idx) continue;
    medoids.push_back({{"cluster", c}, {"user", weeks[*idx].user}, {"week", weeks[*idx].slots}});
  }
  summary["medoids"] = std::move(medoids);
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
  m.write(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic human mobility trajectories: diary learning, generation and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DITRAS_VERSION);
  std::function<void()> action;

  LearnArgs learn;
  auto* l = app.add_subcommand("learn", "Learn a Markov diary model from raw records");
  l->add_option("--input", learn.input, "Raw CSV: user_id,lat,lon,timestamp")->required()->check(CLI::ExistingFile);
  l->add_option("--out", learn.out, "Output directory")->required();
  l->add_option("--slot-seconds", learn.slot_seconds, "Slot length in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  l->add_option("--period", learn.period, "Diary period in slots")->capture_default_str()->check(CLI::PositiveNumber);
  l->add_option("--min-location-freq", learn.min_location_freq, "Drop locations with this share of records or less")->capture_default_str();
  l->add_option("--min-call-rate", learn.min_call_rate, "Minimum records per hour")->capture_default_str();
  l->add_option("--observation-days", learn.observation_days, "Observation window in days");
  l->add_flag("--gps", learn.gps, "Records are GPS fixes");
  l->add_option("--stop-threshold", learn.stop_threshold, "GPS gap that ends a trip, seconds")->capture_default_str();
  l->add_option("--min-trips-per-day", learn.min_trips_per_day, "GPS vehicle activity threshold")->capture_default_str();
  l->add_option("--tessellation", learn.tessellation, "Snap coordinates to this tessellation")->check(CLI::ExistingFile);
  l->add_flag("--planar", learn.planar, "Tessellation uses planar coordinates");
  l->add_option("--weighting", learn.weighting, "Slot weighting")->capture_default_str()->check(CLI::IsMember({"count", "dwell"}));
  l->callback([&] { action = [&] { run_learn(learn, *l); }; });

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate synthetic trajectories");
  gen.tess.add_to(*g);
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--diary", gen.diary, "Diary generator")->capture_default_str()->check(CLI::IsMember({"md", "rd", "wt"}));
  g->add_option("--model", gen.model, "Diary model JSON (for --diary md)")->check(CLI::ExistingFile);
  g->add_option("--trajectory", gen.trajectory, "Trajectory generator")->capture_default_str()->check(CLI::IsMember({"depr", "swim", "latp"}));
  g->add_option("--agents", gen.agents, "Number of agents")->capture_default_str();
  g->add_option("--slots", gen.slots, "Slots per agent")->capture_default_str();
  g->add_option("--slot-seconds", gen.slot_seconds, "Slot length in seconds")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--start-epoch", gen.start_epoch, "Epoch second of slot 0")->capture_default_str();
  g->add_option("--seed", gen.seed, "Master seed (drawn and recorded when absent)");
  g->add_option("--rho", gen.rho, "d-EPR exploration scale")->capture_default_str();
  g->add_option("--gamma", gen.gamma, "d-EPR exploration exponent")->capture_default_str();
  g->add_option("--alpha", gen.alpha, "SWIM home-distance weight")->capture_default_str();
  g->add_option("--latp-exponent", gen.latp_exponent, "LATP distance exponent")->capture_default_str();
  g->add_option("--beta", gen.beta, "Waiting-time exponent")->capture_default_str();
  g->add_option("--tau-hours", gen.tau_hours, "Waiting-time cutoff in hours")->capture_default_str();
  g->add_option("--threads", gen.threads, "Worker threads")->capture_default_str();
  g->add_option("--counting", gen.counting, "Visit counting for returns")->capture_default_str()->check(CLI::IsMember({"slot", "trip"}));
  g->add_flag("--compact", gen.compact, "Write run-length rows");
  g->callback([&] { action = [&] { run_generate(gen, *g); }; });

  MeasureArgs meas;
  auto* me = app.add_subcommand("measure", "Compute mobility measure distributions");
  meas.tess.add_to(*me);
  meas.pop.add_to(*me);
  me->add_option("--input", meas.input, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  me->add_option("--out", meas.out, "Output directory")->required();
  me->add_option("--measures", meas.measures, "Subset of measures (default all)");
  me->callback([&] { action = [&] { run_measure(meas, *me); }; });

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Score models against a reference population");
  cmp.tess.add_to(*c);
  cmp.pop.add_to(*c);
  c->add_option("--reference", cmp.reference, "Reference trajectory CSV")->required()->check(CLI::ExistingFile);
  c->add_option("--model", cmp.models, "NAME=PATH of a model trajectory CSV")->required();
  c->add_option("--out", cmp.out, "Output directory")->required();
  c->callback([&] { action = [&] { run_compare(cmp, *c); }; });

  ClusterArgs cl;
  auto* k = app.add_subcommand("cluster", "Cluster typical weeks");
  k->add_option("--input", cl.input, "Abstract trajectory CSV")->required()->check(CLI::ExistingFile);
  k->add_option("--out", cl.out, "Output directory")->required();
  k->add_option("--eps", cl.eps, "Neighborhood radius")->capture_default_str();
  k->add_option("--min-pts", cl.min_pts, "Core point threshold")->capture_default_str();
  k->add_option("--knee-k", cl.knee_k, "Neighbor rank for knee.csv")->capture_default_str();
  k->add_option("--threads", cl.threads, "Worker threads")->capture_default_str();
  k->callback([&] { action = [&] { run_cluster(cl, *k); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    action();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
