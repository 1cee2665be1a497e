#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seedpick/diversity.hpp"
#include "seedpick/feature_store.hpp"

namespace seedpick {

struct SparsifyConfig {
  double similarity_threshold = 0.75;
};

struct Frame {
  std::string frame_id;
  std::vector<double> mean;
};

struct FrameSequence {
  std::string sequence_id;  // empty for a scene outside any sequence
  std::vector<Frame> frames;
};

/// Frames grouped by sequence, in order of first appearance; frame order
/// within a sequence follows the pack.
struct FramePool {
  std::vector<FrameSequence> sequences;
};

/// Scenes without a sequence id become singleton sequences.
FramePool make_frame_pool(const FeaturePack& pack);

/// Cosine similarity with on-the-fly normalization; 0 if either side is a
/// zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Greedy per-sequence thinning: the first frame is the reference, frames
/// with similarity > threshold to the reference are dropped and the first
/// frame at or below it becomes the new reference.
std::vector<std::string> sparsify_sequences(const FramePool& pool, const SparsifyConfig& cfg);

struct SparsifyReport {
  std::vector<std::string> retained;
  std::vector<std::string> dropped;
  std::vector<std::pair<std::string, double>> per_sequence_ratio;  // retained / total, named sequences only
};

SparsifyReport sparsify_report(const FramePool& pool, const SparsifyConfig& cfg);
nlohmann::json to_json(const SparsifyReport& report);

/// Keeps only the listed scenes, in pack order.
FeaturePack filter_pack(const FeaturePack& pack, const std::vector<std::string>& keep_ids);

/// Complete subgraph on the given node indices (ascending), original
/// weights kept.
DiversityGraph induced_subgraph(const DiversityGraph& graph, const std::vector<std::size_t>& nodes);

/// Indices of the L heaviest edges as (i, j) pairs, heaviest first; ties
/// ordered by the endpoints' scene ids.
std::vector<std::pair<std::size_t, std::size_t>> top_edges(const DiversityGraph& graph, std::int64_t l);

/// Subgraph induced by the endpoints of the L heaviest edges. Every edge
/// between retained scenes is kept, not only the top-L ones.
DiversityGraph top_l_pool(const DiversityGraph& graph, std::int64_t l);

}  // namespace seedpick
