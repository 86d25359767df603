#include "ditras/diary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "ditras/errors.hpp"

namespace ditras {

std::string MobilityDiary::to_string() const {
  std::string s;
  s.reserve(tokens.size());
  for (auto t : tokens) s.push_back(static_cast<char>(t));
  return s;
}

MobilityDiary MobilityDiary::parse(std::string_view text, std::int64_t slot_seconds) {
  MobilityDiary d;
  d.slot_seconds = slot_seconds;
  d.tokens.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '1':
        d.tokens.push_back(DiaryToken::routine);
        ++d.slot_count;
        break;
      case '0':
        d.tokens.push_back(DiaryToken::non_routine);
        ++d.slot_count;
        break;
      case '|':
        d.tokens.push_back(DiaryToken::separator);
        break;
      default:
        throw DataError(std::string("invalid diary symbol '") + c + "'");
    }
  }
  return d;
}

bool validate_tokens(std::span<const DiaryToken> tokens) {
  bool has_prev = false;
  DiaryToken prev = DiaryToken::separator;
  for (auto t : tokens) {
    switch (t) {
      case DiaryToken::separator:
        if (!has_prev || prev == DiaryToken::separator) return false;
        break;
      case DiaryToken::routine:
        if (has_prev && prev == DiaryToken::non_routine) return false;
        break;
      case DiaryToken::non_routine:
        if (has_prev && prev == DiaryToken::routine) return false;
        break;
      default:
        return false;
    }
    prev = t;
    has_prev = true;
  }
  return !(has_prev && prev == DiaryToken::non_routine);
}

bool validate_diary(const MobilityDiary& d) {
  const auto slots = static_cast<std::size_t>(
      std::count_if(d.tokens.begin(), d.tokens.end(), [](DiaryToken t) { return t != DiaryToken::separator; }));
  return slots == d.slot_count && validate_tokens(d.tokens);
}

TypicalDiary home_typical_diary(const AbstractTrajectory& trajectory) {
  if (trajectory.slots.empty()) throw EmptyUserError("user '" + trajectory.user + "' has an empty trajectory");
  std::map<std::uint32_t, std::size_t> freq;
  for (auto a : trajectory.slots) ++freq[a];
  std::uint32_t home = freq.begin()->first;
  std::size_t best = 0;
  for (const auto& [loc, n] : freq) {
    if (n > best) {
      best = n;
      home = loc;
    }
  }
  return TypicalDiary::constant(home, trajectory.slots.size());
}

// ---------------------------------------------------------------------------

MarkovDiaryModel::MarkovDiaryModel(std::uint32_t period, std::int64_t slot_seconds)
    : period_(period), slot_seconds_(slot_seconds) {
  if (period == 0) throw ConfigError("diary period must be at least 1");
  if (slot_seconds <= 0) throw ConfigError("slot length must be positive");
  counts_.assign(state_count() * row_width(), 0);
  probs_.assign(state_count() * row_width(), 0.0);
  live_.assign(state_count(), 0);
}

std::size_t MarkovDiaryModel::index(DiaryState s) const {
  if (s.phase >= period_) {
    throw IndexError("diary phase " + std::to_string(s.phase) + " outside period " + std::to_string(period_));
  }
  return 2 * static_cast<std::size_t>(s.phase) + (s.routine ? 1 : 0);
}

std::size_t MarkovDiaryModel::column(DiaryTransition t) const {
  if (t.to_routine) return 0;
  if (t.tau < 1 || t.tau > period_) {
    throw IndexError("stay duration " + std::to_string(t.tau) + " outside [1, " + std::to_string(period_) + "]");
  }
  return t.tau;
}

DiaryState MarkovDiaryModel::target(DiaryState from, DiaryTransition t) const {
  if (t.to_routine) return {(from.phase + 1) % period_, true};
  return {static_cast<std::uint32_t>((static_cast<std::uint64_t>(from.phase) + t.tau) % period_), false};
}

void MarkovDiaryModel::add_observation(DiaryState from, DiaryTransition t, std::uint64_t n) {
  counts_[index(from) * row_width() + column(t)] += n;
}

void MarkovDiaryModel::merge_counts(const MarkovDiaryModel& other) {
  if (other.period_ != period_ || other.slot_seconds_ != slot_seconds_) {
    throw ConfigMismatchError("cannot merge diary models with different period or slot length");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t MarkovDiaryModel::count(DiaryState from, DiaryTransition t) const {
  return counts_[index(from) * row_width() + column(t)];
}

std::span<const std::uint64_t> MarkovDiaryModel::count_row(DiaryState from) const {
  return {counts_.data() + index(from) * row_width(), row_width()};
}

std::uint64_t MarkovDiaryModel::row_count(DiaryState from) const {
  std::uint64_t n = 0;
  for (auto c : count_row(from)) n += c;
  return n;
}

void MarkovDiaryModel::normalize() {
  const std::size_t w = row_width();
  for (std::size_t r = 0; r < state_count(); ++r) {
    std::uint64_t total = 0;
    for (std::size_t c = 0; c < w; ++c) total += counts_[r * w + c];
    live_[r] = total > 0;
    for (std::size_t c = 0; c < w; ++c) {
      probs_[r * w + c] = total > 0 ? static_cast<double>(counts_[r * w + c]) / static_cast<double>(total) : 0.0;
    }
  }
}

void MarkovDiaryModel::set_row(DiaryState from, std::span<const double> probs) {
  if (probs.size() != row_width()) throw InvalidModelError("diary row has the wrong width");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidModelError("diary transition probability outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidModelError("diary row (" + std::to_string(from.phase) + "," + (from.routine ? "1" : "0") +
                            ") sums to " + std::to_string(sum));
  }
  const std::size_t r = index(from);
  std::copy(probs.begin(), probs.end(), probs_.begin() + static_cast<std::ptrdiff_t>(r * row_width()));
  live_[r] = 1;
}

double MarkovDiaryModel::probability(DiaryState from, DiaryTransition t) const {
  return probs_[index(from) * row_width() + column(t)];
}

std::span<const double> MarkovDiaryModel::row(DiaryState from) const {
  return {probs_.data() + index(from) * row_width(), row_width()};
}

DiaryTransition MarkovDiaryModel::sample(DiaryState from, Rng& rng) const {
  if (!has_row(from)) return DiaryTransition::routine();
  const std::size_t c = sample_weighted(row(from), rng);
  if (c == 0 || c >= row_width()) return DiaryTransition::routine();
  return DiaryTransition::stay(static_cast<std::uint32_t>(c));
}

// ---------------------------------------------------------------------------

void mdl_accumulate(const AbstractTrajectory& trajectory, const TypicalDiary& typical, MarkovDiaryModel& model) {
  const auto& a = trajectory.slots;
  const std::size_t n = a.size();
  if (typical.slots.size() < n) {
    throw ConfigMismatchError("typical diary of user '" + trajectory.user + "' is shorter than the trajectory");
  }
  if (trajectory.slot_seconds != model.slot_seconds()) {
    throw ConfigMismatchError("trajectory slot length differs from the model's");
  }
  const auto period = static_cast<std::int64_t>(model.period());
  const std::int64_t base = trajectory.first_absolute_slot();
  auto phase = [&](std::size_t i) {
    return static_cast<std::uint32_t>(((base + static_cast<std::int64_t>(i)) % period + period) % period);
  };
  auto typical_at = [&](std::size_t i) { return a[i] == typical.slots[i]; };
  // Length of the run of identical non-typical locations starting at `start`.
  auto run_length = [&](std::size_t start) {
    std::size_t j = start + 1;
    while (j < n && a[j] == a[start] && !typical_at(j)) ++j;
    return j - start;
  };
  auto capped = [&](std::size_t tau) {
    return static_cast<std::uint32_t>(std::min<std::size_t>(tau, model.period()));
  };

  std::size_t s = 0;
  while (s + 1 < n) {
    const DiaryState from{phase(s), typical_at(s)};
    if (typical_at(s + 1)) {
      model.add_observation(from, DiaryTransition::routine());
      ++s;
      continue;
    }
    if (!from.routine && a[s + 1] == a[s]) {
      // Inside a stay that started before the first slot.
      ++s;
      continue;
    }
    const std::size_t tau = run_length(s + 1);
    if (s + tau + 1 >= n) break;  // stay reaches the end of the data: its length is unknown
    model.add_observation(from, DiaryTransition::stay(capped(tau)));
    s += tau;
  }
}

MarkovDiaryModel mdl_learn(std::span<const AbstractTrajectory> trajectories, std::span<const TypicalDiary> typical,
                           std::uint32_t period) {
  if (trajectories.empty()) throw EmptyCorpusError("no trajectories to learn from");
  if (typical.size() != trajectories.size()) {
    throw ConfigMismatchError("need exactly one typical diary per trajectory");
  }
  const std::int64_t slot_seconds = trajectories.front().slot_seconds;
  MarkovDiaryModel model(period, slot_seconds);
  for (std::size_t u = 0; u < trajectories.size(); ++u) {
    if (trajectories[u].slot_seconds != slot_seconds) {
      throw ConfigMismatchError("trajectories do not share a slot length");
    }
    mdl_accumulate(trajectories[u], typical[u], model);
  }
  model.normalize();
  return model;
}

MarkovDiaryModel mdl_learn(std::span<const AbstractTrajectory> trajectories, std::uint32_t period) {
  std::vector<TypicalDiary> typical;
  typical.reserve(trajectories.size());
  for (const auto& t : trajectories) typical.push_back(home_typical_diary(t));
  return mdl_learn(trajectories, typical, period);
}

// ---------------------------------------------------------------------------

MobilityDiary md_generate(const MarkovDiaryModel& model, std::size_t n_slots, DiaryState start, Rng& rng) {
  if (n_slots == 0) throw ConfigError("diary length must be at least 1");
  if (start.phase >= model.period()) throw ConfigError("start phase outside the model period");
  MobilityDiary d;
  d.slot_seconds = model.slot_seconds();
  d.tokens.reserve(n_slots + n_slots / 2);

  DiaryState state = start;
  d.tokens.push_back(state.routine ? DiaryToken::routine : DiaryToken::non_routine);
  std::size_t emitted = 1;
  while (emitted < n_slots) {
    const DiaryTransition t = model.sample(state, rng);
    if (!(state.routine && t.to_routine)) d.tokens.push_back(DiaryToken::separator);
    if (t.to_routine) {
      d.tokens.push_back(DiaryToken::routine);
      ++emitted;
    } else {
      const std::size_t k = std::min<std::size_t>(t.tau, n_slots - emitted);
      d.tokens.insert(d.tokens.end(), k, DiaryToken::non_routine);
      emitted += k;
    }
    state = model.target(state, t);
  }
  if (d.tokens.back() == DiaryToken::non_routine) d.tokens.push_back(DiaryToken::separator);
  d.slot_count = n_slots;
  return d;
}

MobilityDiary rd_generate(std::size_t n_slots, std::int64_t slot_seconds) {
  if (n_slots == 0) throw ConfigError("diary length must be at least 1");
  MobilityDiary d;
  d.slot_seconds = slot_seconds;
  d.slot_count = n_slots;
  d.tokens.reserve(2 * n_slots);
  for (std::size_t i = 0; i < n_slots; ++i) {
    d.tokens.push_back(DiaryToken::non_routine);
    d.tokens.push_back(DiaryToken::separator);
  }
  return d;
}

WaitingTimeSampler::WaitingTimeSampler(double beta, double tau_hours, double min_hours, double max_hours,
                                       std::size_t grid_points)
    : beta_(beta), tau_(tau_hours), min_(min_hours), max_(max_hours) {
  if (!(beta > 0.0) || !(tau_hours > 0.0)) throw ConfigError("waiting-time beta and tau must be positive");
  if (!(min_hours > 0.0) || !(max_hours > min_hours)) throw ConfigError("waiting-time support must be 0 < min < max");
  if (grid_points < 2) throw ConfigError("waiting-time grid needs at least 2 points");
  // Work in u = ln(dt): the density becomes exp(-beta u) exp(-e^u / tau).
  const double u0 = std::log(min_hours);
  const double u1 = std::log(max_hours);
  log_grid_.resize(grid_points);
  cdf_.resize(grid_points);
  auto g = [&](double u) { return std::exp(-beta_ * u - std::exp(u) / tau_); };
  double prev = g(u0);
  log_grid_[0] = u0;
  cdf_[0] = 0.0;
  for (std::size_t k = 1; k < grid_points; ++k) {
    const double u = u0 + (u1 - u0) * static_cast<double>(k) / static_cast<double>(grid_points - 1);
    const double cur = g(u);
    log_grid_[k] = u;
    cdf_[k] = cdf_[k - 1] + 0.5 * (prev + cur) * (u - log_grid_[k - 1]);
    prev = cur;
  }
  const double total = cdf_.back();
  for (double& c : cdf_) c /= total;
}

double WaitingTimeSampler::sample_hours(Rng& rng) const {
  const double target = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  if (it == cdf_.begin()) return min_;
  if (it == cdf_.end()) return max_;
  const auto k = static_cast<std::size_t>(it - cdf_.begin());
  const double c0 = cdf_[k - 1];
  const double c1 = cdf_[k];
  const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
  return std::exp(log_grid_[k - 1] + frac * (log_grid_[k] - log_grid_[k - 1]));
}

MobilityDiary wt_generate(std::size_t n_slots, const WaitingTimeSampler& sampler, std::int64_t slot_seconds,
                          Rng& rng) {
  if (n_slots == 0) throw ConfigError("diary length must be at least 1");
  if (slot_seconds <= 0) throw ConfigError("slot length must be positive");
  MobilityDiary d;
  d.slot_seconds = slot_seconds;
  d.slot_count = n_slots;
  const double slot_hours = static_cast<double>(slot_seconds) / 3600.0;
  std::size_t emitted = 0;
  while (emitted < n_slots) {
    const double hours = sampler.sample_hours(rng);
    const auto slots = static_cast<std::size_t>(std::max(1.0, std::round(hours / slot_hours)));
    const std::size_t k = std::min(slots, n_slots - emitted);
    d.tokens.insert(d.tokens.end(), k, DiaryToken::non_routine);
    d.tokens.push_back(DiaryToken::separator);
    emitted += k;
  }
  return d;
}

MobilityDiary wt_generate(std::size_t n_slots, double beta, double tau_hours, std::int64_t slot_seconds, Rng& rng) {
  const double slot_hours = static_cast<double>(slot_seconds) / 3600.0;
  WaitingTimeSampler sampler(beta, tau_hours, slot_hours, 7.0 * 24.0);
  return wt_generate(n_slots, sampler, slot_seconds, rng);
}

}  // namespace ditras
