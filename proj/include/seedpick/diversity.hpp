#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "seedpick/feature_store.hpp"
#include "seedpick/kmeans.hpp"
#include "seedpick/matrix.hpp"

namespace seedpick {

/// Cluster-center representatives of one scene and its intra-scene
/// diversity. Profiles restored from a graph dump carry no centers.
struct ClusterProfile {
  std::string scene_id;
  std::uint64_t cost = 0;
  Matrix<double> centers;           // k_eff x D
  std::vector<double> center_mean;  // average of the centers
  std::size_t k_eff = 0;
  double intra_diversity = 0.0;
};

/// Average of (1 - c_k . c_k') over unordered center pairs; 0 below two
/// centers. Centers are used as-is, without re-normalization.
double intra_diversity(const Matrix<double>& centers);

/// Average of (1 - a_k . b_k') over all center pairs of two profiles, for
/// any pair of profile sizes. Throws on dimension mismatch.
double inter_diversity(const ClusterProfile& a, const ClusterProfile& b);

ClusterProfile make_profile(std::string scene_id, std::uint64_t cost, Matrix<double> centers);
ClusterProfile profile_scene(const ViewFeatureSet& scene, const KMeansConfig& cfg);

/// Complete graph over scenes. Pair data is stored upper-triangular, one slot
/// per i < j.
class DiversityGraph {
 public:
  DiversityGraph() = default;
  explicit DiversityGraph(std::vector<ClusterProfile> nodes);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return weight_.size(); }
  const std::vector<ClusterProfile>& nodes() const noexcept { return nodes_; }
  const ClusterProfile& node(std::size_t i) const { return nodes_[i]; }

  static std::size_t pair_index(std::size_t n, std::size_t i, std::size_t j) noexcept {
    if (i > j) std::swap(i, j);
    return i * n - i * (i + 1) / 2 + (j - i - 1);
  }

  double inter(std::size_t i, std::size_t j) const { return inter_[pair_index(size(), i, j)]; }
  double weight(std::size_t i, std::size_t j) const { return weight_[pair_index(size(), i, j)]; }

  /// Stores d_ij and e_ij = d_ij * d_i * d_j.
  void set_inter(std::size_t i, std::size_t j, double d_ij);

  /// Direct access for restoring dumps whose e_ij were computed elsewhere.
  void set_pair(std::size_t i, std::size_t j, double d_ij, double e_ij);

  std::vector<std::uint64_t> costs() const;
  void set_cost(std::size_t i, std::uint64_t cost) { nodes_[i].cost = cost; }

 private:
  std::vector<ClusterProfile> nodes_;
  std::vector<double> inter_;
  std::vector<double> weight_;
};

/// Profiles every scene (seed per scene derived from cfg.rng_seed and the
/// scene id) and fills all M(M-1)/2 edges.
DiversityGraph build_graph(const FeaturePack& pack, const KMeansConfig& cfg, std::size_t threads = 1);
DiversityGraph build_graph(std::vector<ClusterProfile> profiles, std::size_t threads = 1);

nlohmann::json graph_to_json(const DiversityGraph& graph);
DiversityGraph graph_from_json(const nlohmann::json& doc);

}  // namespace seedpick
