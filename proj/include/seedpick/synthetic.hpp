#pragma once

#include <cstdint>

#include "seedpick/feature_store.hpp"

namespace seedpick {

/// Scenes draw a few "content modes" from a shared vocabulary of random unit
/// directions; each view is a noisy copy of one of its scene's modes.
struct SyntheticConfig {
  std::size_t scenes = 8;
  std::uint32_t dimension = 16;
  std::size_t vocabulary = 24;
  std::size_t min_modes = 1;
  std::size_t max_modes = 6;
  std::size_t min_views = 4;
  std::size_t max_views = 12;
  double noise = 0.15;
  std::uint64_t min_cost = 1000;
  std::uint64_t max_cost = 5000;
  bool cost_free = false;
  std::uint64_t seed = 1;
};

FeaturePack make_synthetic_pack(const SyntheticConfig& cfg);

/// The 8-scene fixture shipped as data/demo.sfp.
FeaturePack make_demo_pack();

/// One sequence of single-view frames: `novel` mutually dissimilar frames,
/// each followed by `duplicates` near-copies of it.
FeaturePack make_redundant_sequence_pack(std::size_t novel, std::size_t duplicates, std::uint32_t dimension,
                                         std::uint64_t seed, const std::string& sequence_id = "seq0");

}  // namespace seedpick
