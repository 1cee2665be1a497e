#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seedpick/feature_store.hpp"

namespace seedpick {

struct SceneCost {
  std::string id;
  std::uint64_t cost = 0;
};

// All baselines return indices into their input lists, ascending.

/// Seeded shuffle, then scenes are taken in shuffled order whenever they
/// still fit the budget.
std::vector<std::size_t> select_random(const std::vector<SceneCost>& scenes, std::uint64_t budget,
                                       std::uint64_t rng_seed);

/// k-means on scene means; in round r every cluster contributes its r-th
/// nearest not-yet-selected scene. Whole rounds run until the accumulated
/// cost reaches the budget, then the most costly scenes are dropped one at
/// a time (latest pick first among equal costs) until the budget holds.
std::vector<std::size_t> select_kmcentroid(const std::vector<SceneMeanFeature>& means,
                                           const std::vector<std::uint64_t>& costs, std::uint64_t budget,
                                           std::size_t k, std::uint64_t rng_seed);

/// First round as select_kmcentroid, then repeatedly the scene whose minimum
/// distance to all centroids is largest, with the same cost trim at the end.
std::vector<std::size_t> select_kmfurthest(const std::vector<SceneMeanFeature>& means,
                                           const std::vector<std::uint64_t>& costs, std::uint64_t budget,
                                           std::size_t k, std::uint64_t rng_seed);

}  // namespace seedpick
