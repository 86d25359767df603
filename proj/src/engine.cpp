#include "ditras/engine.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <thread>

#include "ditras/errors.hpp"

namespace ditras {

namespace {

constexpr int kMaxRedraws = 16;

}  // namespace

void SimulationConfig::validate() const {
  if (n_agents < 1) throw ConfigError("number of agents must be at least 1");
  if (n_slots < 1) throw ConfigError("number of slots must be at least 1");
  if (slot_seconds <= 0) throw ConfigError("slot length must be positive");
  if (!(depr.rho > 0.0 && depr.rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
  if (!(depr.gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (!(swim_alpha >= 0.0 && swim_alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(latp_exponent > 0.0)) throw ConfigError("LATP exponent must be positive");
  if (!(wt_beta > 0.0) || !(wt_tau_hours > 0.0)) throw ConfigError("waiting-time beta and tau must be positive");
  if (threads < 1) throw ConfigError("thread count must be at least 1");
}

std::vector<LocationId> materialize_typical_diary(const TypicalDiary& typical, const WeightedTessellation& t,
                                                  Rng& rng) {
  std::map<std::uint32_t, LocationId> assigned;
  std::vector<LocationId> out;
  out.reserve(typical.slots.size());
  for (auto abstract : typical.slots) {
    auto it = assigned.find(abstract);
    if (it == assigned.end()) it = assigned.emplace(abstract, sample_by_relevance(t, rng)).first;
    out.push_back(it->second);
  }
  return out;
}

SampledTrajectory trajectory_from_diary(const MobilityDiary& diary, std::span<const LocationId> typical_locations,
                                        AgentLocationSampler& sampler, AgentSpatialState& state, Rng& rng,
                                        VisitCounting counting, std::size_t agent) {
  if (typical_locations.size() < diary.slot_count) {
    throw ConfigMismatchError("typical diary is shorter than the mobility diary");
  }
  SampledTrajectory out;
  out.agent = agent;
  out.slot_seconds = diary.slot_seconds;
  out.slots.reserve(diary.slot_count);

  const auto& tokens = diary.tokens;
  std::size_t d = 0;
  while (d < tokens.size()) {
    const DiaryToken tok = tokens[d];
    if (tok == DiaryToken::separator) {
      ++d;
      continue;
    }
    const std::size_t slot = out.slots.size();
    if (slot >= typical_locations.size()) throw ConfigMismatchError("diary has more slots than declared");
    if (tok == DiaryToken::routine) {
      const LocationId typical = typical_locations[slot];
      if (counting == VisitCounting::per_slot) {
        state.move_to(typical);
      } else if (state.current() != typical) {
        state.move_to(typical);
      }
      out.slots.push_back(typical);
      ++d;
      continue;
    }

    std::size_t k = 0;
    while (d + k < tokens.size() && tokens[d + k] == DiaryToken::non_routine) ++k;
    const LocationId avoid = typical_locations[slot];
    LocationId l;
    try {
      l = sampler.next(state, rng);
      for (int attempt = 0; l == avoid && attempt < kMaxRedraws; ++attempt) l = sampler.next(state, rng);
      if (l == avoid) l = sampler.most_likely(state, avoid);
    } catch (const GenerationError&) {
      throw;
    } catch (const Error& e) {
      throw GenerationError(agent, slot, e.what());
    }
    state.move_to(l, counting == VisitCounting::per_slot ? k : 1);
    out.slots.insert(out.slots.end(), k, l);
    d += k;
  }
  if (out.slots.size() != diary.slot_count) {
    throw ConfigMismatchError("diary slot count does not match its tokens");
  }
  return out;
}

SampledTrajectory generate_agent(std::size_t agent, const DiaryGenerator& diaries,
                                 const TrajectoryGenerator& trajectories, const WeightedTessellation& t,
                                 const SimulationConfig& config) {
  Rng rng = Rng::stream(config.seed, agent);
  const auto typical = materialize_typical_diary(TypicalDiary::constant(0, config.n_slots), t, rng);
  const MobilityDiary diary = diaries.generate(config.n_slots, rng);
  AgentSpatialState state(typical.front());
  auto sampler = trajectories.for_agent(typical.front());
  SampledTrajectory out = trajectory_from_diary(diary, typical, *sampler, state, rng, config.counting, agent);
  out.slot_seconds = config.slot_seconds;
  out.start_epoch = config.start_epoch;
  return out;
}

std::vector<SampledTrajectory> run_ditras(const DiaryGenerator& diaries, const TrajectoryGenerator& trajectories,
                                          const WeightedTessellation& t, const SimulationConfig& config) {
  config.validate();
  std::vector<SampledTrajectory> out(config.n_agents);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(config.threads, config.n_agents));
  if (workers <= 1) {
    for (std::size_t a = 0; a < config.n_agents; ++a) out[a] = generate_agent(a, diaries, trajectories, t, config);
    return out;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> failed_at(workers, config.n_agents);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t a = w; a < config.n_agents; a += workers) {
        try {
          out[a] = generate_agent(a, diaries, trajectories, t, config);
        } catch (...) {
          errors[w] = std::current_exception();
          failed_at[w] = a;
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  // Report the failure a sequential run would have hit first.
  const auto first = std::min_element(failed_at.begin(), failed_at.end());
  if (*first < config.n_agents) std::rethrow_exception(errors[static_cast<std::size_t>(first - failed_at.begin())]);
  return out;
}

}  // namespace ditras
