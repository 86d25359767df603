#pragma once

#include <cstdint>
#include <vector>

#include "ditras/engine.hpp"
#include "ditras/tessellation.hpp"

namespace testing {

inline ditras::WeightedTessellation planar(std::vector<ditras::Location> locs) {
  return ditras::WeightedTessellation(std::move(locs), ditras::CoordinateSystem::planar);
}

/// Locations on the x axis at the given positions, unit relevance.
inline ditras::WeightedTessellation line(std::vector<double> xs) {
  std::vector<ditras::Location> locs;
  for (double x : xs) locs.push_back({x, 0.0, 1.0});
  return planar(std::move(locs));
}

inline ditras::SampledTrajectory traj(std::vector<ditras::LocationId> slots, std::size_t agent = 0,
                                      std::int64_t start_epoch = 0, std::int64_t slot_seconds = 3600) {
  ditras::SampledTrajectory t;
  t.agent = agent;
  t.slot_seconds = slot_seconds;
  t.start_epoch = start_epoch;
  t.slots = std::move(slots);
  return t;
}

}  // namespace testing
