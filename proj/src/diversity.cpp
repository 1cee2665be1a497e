#include "seedpick/diversity.hpp"

#include <algorithm>

#include "seedpick/error.hpp"
#include "seedpick/parallel.hpp"
#include "seedpick/rng.hpp"

namespace seedpick {

namespace {

double clamp_diversity(double v) { return std::clamp(v, 0.0, 2.0); }

}  // namespace

double intra_diversity(const Matrix<double>& centers) {
  const std::size_t k = centers.rows();
  if (k < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) sum += 1.0 - dot(centers.row(a), centers.row(b));
  }
  return clamp_diversity(2.0 * sum / (static_cast<double>(k) * static_cast<double>(k - 1)));
}

double inter_diversity(const ClusterProfile& a, const ClusterProfile& b) {
  if (a.center_mean.size() != b.center_mean.size()) {
    throw Error(ErrorKind::validation, "profile dimension mismatch: '" + a.scene_id + "' has " +
                                           std::to_string(a.center_mean.size()) + ", '" + b.scene_id +
                                           "' has " + std::to_string(b.center_mean.size()));
  }
  // mean_k mean_k' (1 - a_k . b_k') = 1 - mean(a) . mean(b)
  return clamp_diversity(1.0 - dot(std::span<const double>(a.center_mean), std::span<const double>(b.center_mean)));
}

ClusterProfile make_profile(std::string scene_id, std::uint64_t cost, Matrix<double> centers) {
  ClusterProfile p;
  p.scene_id = std::move(scene_id);
  p.cost = cost;
  p.k_eff = centers.rows();
  p.center_mean.assign(centers.cols(), 0.0);
  for (std::size_t k = 0; k < centers.rows(); ++k) {
    const auto row = centers.row(k);
    for (std::size_t j = 0; j < row.size(); ++j) p.center_mean[j] += row[j];
  }
  if (p.k_eff > 0) {
    for (double& v : p.center_mean) v /= static_cast<double>(p.k_eff);
  }
  p.intra_diversity = intra_diversity(centers);
  p.centers = std::move(centers);
  return p;
}

ClusterProfile profile_scene(const ViewFeatureSet& scene, const KMeansConfig& cfg) {
  KMeansConfig scene_cfg = cfg;
  scene_cfg.rng_seed = mix_seed(cfg.rng_seed, fnv1a(scene.scene_id));
  auto km = kmeans(scene.views, scene_cfg);
  return make_profile(scene.scene_id, scene.cost, std::move(km.centers));
}

DiversityGraph::DiversityGraph(std::vector<ClusterProfile> nodes) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  const std::size_t pairs = n < 2 ? 0 : n * (n - 1) / 2;
  inter_.assign(pairs, 0.0);
  weight_.assign(pairs, 0.0);
}

void DiversityGraph::set_inter(std::size_t i, std::size_t j, double d_ij) {
  const std::size_t p = pair_index(size(), i, j);
  inter_[p] = d_ij;
  weight_[p] = d_ij * (nodes_[i].intra_diversity * nodes_[j].intra_diversity);
}

void DiversityGraph::set_pair(std::size_t i, std::size_t j, double d_ij, double e_ij) {
  const std::size_t p = pair_index(size(), i, j);
  inter_[p] = d_ij;
  weight_[p] = e_ij;
}

std::vector<std::uint64_t> DiversityGraph::costs() const {
  std::vector<std::uint64_t> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.cost);
  return out;
}

DiversityGraph build_graph(std::vector<ClusterProfile> profiles, std::size_t threads) {
  DiversityGraph graph(std::move(profiles));
  const std::size_t n = graph.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (graph.node(i).center_mean.size() != graph.node(0).center_mean.size()) {
      throw Error(ErrorKind::validation, "profiles have mixed dimensions");
    }
  }
  // Row i owns pairs (i, j > i).
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) graph.set_inter(i, j, inter_diversity(graph.node(i), graph.node(j)));
  });
  return graph;
}

DiversityGraph build_graph(const FeaturePack& pack, const KMeansConfig& cfg, std::size_t threads) {
  std::vector<ClusterProfile> profiles(pack.scenes.size());
  parallel_for(pack.scenes.size(), threads, [&](std::size_t i) { profiles[i] = profile_scene(pack.scenes[i], cfg); });
  return build_graph(std::move(profiles), threads);
}

nlohmann::json graph_to_json(const DiversityGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : graph.nodes()) {
    nodes.push_back({{"id", n.scene_id}, {"d", n.intra_diversity}, {"cost", n.cost}, {"k_eff", n.k_eff}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (std::size_t j = i + 1; j < graph.size(); ++j) {
      edges.push_back({{"i", i}, {"j", j}, {"d_ij", graph.inter(i, j)}, {"e_ij", graph.weight(i, j)}});
    }
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

DiversityGraph graph_from_json(const nlohmann::json& doc) {
  try {
    std::vector<ClusterProfile> profiles;
    for (const auto& n : doc.at("nodes")) {
      ClusterProfile p;
      p.scene_id = n.at("id").get<std::string>();
      p.intra_diversity = n.at("d").get<double>();
      p.cost = n.at("cost").get<std::uint64_t>();
      p.k_eff = n.at("k_eff").get<std::size_t>();
      if (p.scene_id.empty()) throw Error(ErrorKind::validation, "graph node with empty id");
      if (!(p.intra_diversity >= 0.0 && p.intra_diversity <= 2.0)) {
        throw Error(ErrorKind::validation, "node '" + p.scene_id + "' intra-diversity outside [0, 2]");
      }
      profiles.push_back(std::move(p));
    }
    DiversityGraph graph(std::move(profiles));
    const std::size_t n = graph.size();
    std::vector<bool> seen(graph.edge_count(), false);
    for (const auto& e : doc.at("edges")) {
      const auto i = e.at("i").get<std::size_t>();
      const auto j = e.at("j").get<std::size_t>();
      if (i >= n || j >= n || i == j) throw Error(ErrorKind::validation, "graph edge with bad endpoints");
      const double d_ij = e.at("d_ij").get<double>();
      const double e_ij = e.at("e_ij").get<double>();
      if (!(d_ij >= 0.0 && d_ij <= 2.0) || !(e_ij >= 0.0 && e_ij <= 8.0)) {
        throw Error(ErrorKind::validation, "graph edge value out of range");
      }
      graph.set_pair(i, j, d_ij, e_ij);
      seen[DiversityGraph::pair_index(n, i, j)] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw Error(ErrorKind::validation, "graph dump is missing edges");
    }
    return graph;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("graph dump: ") + e.what());
  }
}

}  // namespace seedpick
