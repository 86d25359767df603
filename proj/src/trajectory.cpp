#include "ditras/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ditras/errors.hpp"

namespace ditras {

AgentSpatialState::AgentSpatialState(LocationId home) : current_(home), home_(home) { record_visit(home); }

std::uint64_t AgentSpatialState::visits(LocationId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? 0 : visits_[it->second].second;
}

void AgentSpatialState::record_visit(LocationId id, std::uint64_t n) {
  auto [it, inserted] = index_.try_emplace(id, visits_.size());
  if (inserted) visits_.emplace_back(id, 0);
  visits_[it->second].second += n;
  total_ += n;
}

void AgentSpatialState::move_to(LocationId id, std::uint64_t n) {
  current_ = id;
  record_visit(id, n);
}

double exploration_probability(std::size_t distinct_count, const DeprParams& params) {
  const double n = static_cast<double>(std::max<std::size_t>(1, distinct_count));
  return std::min(1.0, params.rho * std::pow(n, -params.gamma));
}

std::optional<LocationId> preferential_return(const AgentSpatialState& state, Rng& rng) {
  const auto& visits = state.visit_counts();
  double total = 0.0;
  for (const auto& [loc, n] : visits) {
    if (loc != state.current()) total += static_cast<double>(n);
  }
  if (!(total > 0.0)) return std::nullopt;
  const double target = rng.uniform() * total;
  double acc = 0.0;
  LocationId last = visits.front().first;
  for (const auto& [loc, n] : visits) {
    if (loc == state.current()) continue;
    acc += static_cast<double>(n);
    last = loc;
    if (target < acc) return loc;
  }
  return last;
}

namespace {

void validate_depr(const DeprParams& p) {
  if (!(p.rho > 0.0 && p.rho <= 1.0)) throw ConfigError("d-EPR rho must lie in (0, 1]");
  if (!(p.gamma >= 0.0)) throw ConfigError("d-EPR gamma must be non-negative");
}

LocationId relevance_excluding(const WeightedTessellation& t, LocationId exclude, Rng& rng) {
  std::vector<double> w;
  w.reserve(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) w.push_back(j == exclude ? 0.0 : t.locations()[j].relevance);
  const std::size_t idx = sample_weighted(w, rng);
  if (idx >= w.size()) {
    throw EmptyRelevanceError("no location other than " + std::to_string(exclude) + " has positive relevance");
  }
  return static_cast<LocationId>(idx);
}

// Highest-weight index outside {a, b}; ties go to the smaller index.
std::optional<LocationId> argmax_excluding(std::span<const double> w, LocationId a, LocationId b) {
  std::optional<LocationId> best;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (j == a || j == b || !(w[j] > 0.0)) continue;
    if (!best || w[j] > w[*best]) best = static_cast<LocationId>(j);
  }
  return best;
}

std::vector<double> relevances(const WeightedTessellation& t) {
  std::vector<double> r;
  r.reserve(t.size());
  for (const auto& l : t.locations()) r.push_back(l.relevance);
  return r;
}

[[noreturn]] void no_candidate(const AgentSpatialState& state, LocationId exclude) {
  throw DegenerateDistanceError("no location other than " + std::to_string(state.current()) + " and " +
                                std::to_string(exclude) + " is reachable");
}

}  // namespace

DeprChoice preferential_exploration(const AgentSpatialState& state, const GravityMatrix& gravity,
                                    const WeightedTessellation& t, Rng& rng) {
  if (gravity.size() != t.size()) throw ConfigMismatchError("gravity matrix and tessellation sizes differ");
  const auto row = gravity.row(state.current());
  const std::size_t j = sample_weighted(row, rng);
  DeprChoice c;
  c.explored = true;
  if (j < row.size()) {
    c.location = static_cast<LocationId>(j);
  } else {
    c.relevance_fallback = true;
    c.location = relevance_excluding(t, state.current(), rng);
  }
  return c;
}

DeprChoice depr_step(const AgentSpatialState& state, const GravityMatrix& gravity, const WeightedTessellation& t,
                     const DeprParams& params, Rng& rng) {
  validate_depr(params);
  const bool explore = rng.uniform() < exploration_probability(state.distinct_count(), params);
  if (!explore) {
    if (auto loc = preferential_return(state, rng)) return DeprChoice{*loc, false, false, false};
  }
  DeprChoice c = preferential_exploration(state, gravity, t, rng);
  c.explored = explore;
  c.return_unavailable = !explore;
  return c;
}

LocationId depr_next(const AgentSpatialState& state, const GravityMatrix& gravity, const WeightedTessellation& t,
                     const DeprParams& params, Rng& rng) {
  return depr_step(state, gravity, t, params, rng).location;
}

std::vector<double> normalized_relevance(const WeightedTessellation& t) {
  auto r = relevances(t);
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  const double min = *lo;
  const double span = *hi - *lo;
  for (double& v : r) v = span > 0.0 ? (v - min) / span : 1.0;
  return r;
}

double swim_weight(double distance_from_home_km, double normalized_relevance, double alpha) {
  const double k = 1.0 + distance_from_home_km;
  return alpha / (k * k) + (1.0 - alpha) * normalized_relevance;
}

LocationId swim_next(const AgentSpatialState& state, const WeightedTessellation& t, double alpha, Rng& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("SWIM alpha must lie in [0, 1]");
  const auto rnorm = normalized_relevance(t);
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (j == state.current()) continue;
    w[j] = swim_weight(t.distance(state.home(), static_cast<LocationId>(j)), rnorm[j], alpha);
  }
  const std::size_t idx = sample_weighted(w, rng);
  if (idx < w.size()) return static_cast<LocationId>(idx);
  return relevance_excluding(t, state.current(), rng);
}

LocationId latp_next(const AgentSpatialState& state, const WeightedTessellation& t, double exponent, Rng& rng) {
  if (!(exponent > 0.0)) throw ConfigError("LATP exponent must be positive");
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (j == state.current()) continue;
    const double d = t.distance(state.current(), static_cast<LocationId>(j));
    if (d > 0.0) w[j] = std::pow(d, -exponent);
  }
  const std::size_t idx = sample_weighted(w, rng);
  if (idx >= w.size()) {
    throw DegenerateDistanceError("every candidate coincides with location " + std::to_string(state.current()));
  }
  return static_cast<LocationId>(idx);
}

// ---------------------------------------------------------------------------

DeprGenerator::DeprGenerator(const WeightedTessellation& t, const GravityMatrix& gravity, DeprParams params)
    : t_(t), gravity_(gravity), params_(params), rows_(gravity.size(), gravity.data()) {
  validate_depr(params_);
  if (gravity.size() != t.size()) throw ConfigMismatchError("gravity matrix and tessellation sizes differ");
}

DeprChoice DeprGenerator::step(const AgentSpatialState& state, Rng& rng) const {
  const bool explore = rng.uniform() < exploration_probability(state.distinct_count(), params_);
  if (!explore) {
    if (auto loc = preferential_return(state, rng)) return DeprChoice{*loc, false, false, false};
  }
  DeprChoice c;
  c.explored = explore;
  c.return_unavailable = !explore;
  const std::size_t j = rows_.sample(state.current(), rng);
  if (j < rows_.size()) {
    c.location = static_cast<LocationId>(j);
  } else {
    c.relevance_fallback = true;
    c.location = relevance_excluding(t_, state.current(), rng);
  }
  return c;
}

namespace {

class DeprAgentSampler final : public AgentLocationSampler {
 public:
  explicit DeprAgentSampler(const DeprGenerator& g) : g_(g) {}

  LocationId next(const AgentSpatialState& state, Rng& rng) override { return g_.step(state, rng).location; }

  LocationId most_likely(const AgentSpatialState& state, LocationId exclude) const override {
    if (auto j = argmax_excluding(g_.gravity().row(state.current()), state.current(), exclude)) return *j;
    if (auto j = argmax_excluding(relevances(g_.tessellation()), state.current(), exclude)) return *j;
    no_candidate(state, exclude);
  }

 private:
  const DeprGenerator& g_;
};

class SwimAgentSampler final : public AgentLocationSampler {
 public:
  SwimAgentSampler(const SwimGenerator& g, LocationId home) : g_(g), weights_(g.tessellation().size()) {
    const auto& t = g.tessellation();
    const auto rnorm = g.normalized_relevance();
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      weights_[j] = swim_weight(t.distance(home, static_cast<LocationId>(j)), rnorm[j], g.alpha());
    }
    table_ = CumulativeSampler(weights_);
  }

  LocationId next(const AgentSpatialState& state, Rng& rng) override {
    const LocationId c = state.current();
    const double total = table_.total();
    const double wc = weights_[c] > 0.0 ? weights_[c] : 0.0;
    if (total - wc > 0.0 && wc <= 0.5 * total) {
      for (;;) {
        const std::size_t j = table_.pick(rng.uniform() * total);
        if (j != c) return static_cast<LocationId>(j);
      }
    }
    std::vector<double> w = weights_;
    w[c] = 0.0;
    const std::size_t j = sample_weighted(w, rng);
    if (j < w.size()) return static_cast<LocationId>(j);
    return relevance_excluding(g_.tessellation(), c, rng);
  }

  LocationId most_likely(const AgentSpatialState& state, LocationId exclude) const override {
    if (auto j = argmax_excluding(weights_, state.current(), exclude)) return *j;
    if (auto j = argmax_excluding(relevances(g_.tessellation()), state.current(), exclude)) return *j;
    no_candidate(state, exclude);
  }

 private:
  const SwimGenerator& g_;
  std::vector<double> weights_;
  CumulativeSampler table_;
};

class LatpAgentSampler final : public AgentLocationSampler {
 public:
  explicit LatpAgentSampler(const LatpGenerator& g) : g_(g) {}

  LocationId next(const AgentSpatialState& state, Rng& rng) override {
    const std::size_t j = g_.rows().sample(state.current(), rng);
    if (j >= g_.rows().size()) {
      throw DegenerateDistanceError("every candidate coincides with location " + std::to_string(state.current()));
    }
    return static_cast<LocationId>(j);
  }

  LocationId most_likely(const AgentSpatialState& state, LocationId exclude) const override {
    const auto& t = g_.tessellation();
    std::optional<LocationId> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (j == state.current() || j == exclude) continue;
      const double d = t.distance(state.current(), static_cast<LocationId>(j));
      if (d > 0.0 && d < best_d) {
        best_d = d;
        best = static_cast<LocationId>(j);
      }
    }
    if (best) return *best;
    no_candidate(state, exclude);
  }

 private:
  const LatpGenerator& g_;
};

}  // namespace

std::unique_ptr<AgentLocationSampler> DeprGenerator::for_agent(LocationId) const {
  return std::make_unique<DeprAgentSampler>(*this);
}

SwimGenerator::SwimGenerator(const WeightedTessellation& t, double alpha)
    : t_(t), alpha_(alpha), rnorm_(ditras::normalized_relevance(t)) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("SWIM alpha must lie in [0, 1]");
}

std::unique_ptr<AgentLocationSampler> SwimGenerator::for_agent(LocationId home) const {
  return std::make_unique<SwimAgentSampler>(*this, home);
}

LatpGenerator::LatpGenerator(const WeightedTessellation& t, double exponent) : t_(t), exponent_(exponent) {
  if (!(exponent > 0.0)) throw ConfigError("LATP exponent must be positive");
  const std::size_t n = t.size();
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = t.distance(static_cast<LocationId>(i), static_cast<LocationId>(j));
      if (d > 0.0) {
        const double v = std::pow(d, -exponent_);
        w[i * n + j] = v;
        w[j * n + i] = v;
      }
    }
  }
  rows_ = RowSampler(n, w);
}

std::unique_ptr<AgentLocationSampler> LatpGenerator::for_agent(LocationId) const {
  return std::make_unique<LatpAgentSampler>(*this);
}

}  // namespace ditras
