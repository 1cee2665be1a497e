#include "seedpick/graph_reduce.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "seedpick/error.hpp"

namespace seedpick {

FramePool make_frame_pool(const FeaturePack& pack) {
  const auto means = scene_means(pack);
  FramePool pool;
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < pack.scenes.size(); ++i) {
    const auto& scene = pack.scenes[i];
    Frame frame{scene.scene_id, means[i].mean};
    if (scene.sequence_id.empty()) {
      pool.sequences.push_back({"", {std::move(frame)}});
      continue;
    }
    auto [it, inserted] = by_id.try_emplace(scene.sequence_id, pool.sequences.size());
    if (inserted) pool.sequences.push_back({scene.sequence_id, {}});
    pool.sequences[it->second].frames.push_back(std::move(frame));
  }
  return pool;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

namespace {

void check_threshold(const SparsifyConfig& cfg) {
  if (!(cfg.similarity_threshold >= -1.0 && cfg.similarity_threshold <= 1.0)) {
    throw Error(ErrorKind::validation, "similarity threshold must lie in [-1, 1]");
  }
}

// Per-frame keep flags for one sequence.
std::vector<bool> greedy_keep(const FrameSequence& seq, double threshold) {
  std::vector<bool> keep(seq.frames.size(), false);
  if (seq.frames.empty()) return keep;
  std::size_t ref = 0;
  keep[0] = true;
  for (std::size_t f = 1; f < seq.frames.size(); ++f) {
    if (cosine_similarity(seq.frames[ref].mean, seq.frames[f].mean) > threshold) continue;
    keep[f] = true;
    ref = f;
  }
  return keep;
}

}  // namespace

std::vector<std::string> sparsify_sequences(const FramePool& pool, const SparsifyConfig& cfg) {
  return sparsify_report(pool, cfg).retained;
}

SparsifyReport sparsify_report(const FramePool& pool, const SparsifyConfig& cfg) {
  check_threshold(cfg);
  SparsifyReport report;
  for (const auto& seq : pool.sequences) {
    const auto keep = greedy_keep(seq, cfg.similarity_threshold);
    std::size_t kept = 0;
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      (keep[f] ? report.retained : report.dropped).push_back(seq.frames[f].frame_id);
      kept += keep[f] ? 1 : 0;
    }
    if (!seq.sequence_id.empty() && !seq.frames.empty()) {
      report.per_sequence_ratio.emplace_back(seq.sequence_id,
                                             static_cast<double>(kept) / static_cast<double>(seq.frames.size()));
    }
  }
  return report;
}

nlohmann::json to_json(const SparsifyReport& report) {
  nlohmann::json ratios = nlohmann::json::object();
  for (const auto& [id, r] : report.per_sequence_ratio) ratios[id] = r;
  return {{"retained", report.retained}, {"dropped", report.dropped}, {"per_sequence_ratio", ratios}};
}

FeaturePack filter_pack(const FeaturePack& pack, const std::vector<std::string>& keep_ids) {
  const std::unordered_set<std::string> keep(keep_ids.begin(), keep_ids.end());
  FeaturePack out;
  out.dimension = pack.dimension;
  for (const auto& scene : pack.scenes) {
    if (keep.contains(scene.scene_id)) out.scenes.push_back(scene);
  }
  return out;
}

DiversityGraph induced_subgraph(const DiversityGraph& graph, const std::vector<std::size_t>& nodes) {
  std::vector<ClusterProfile> profiles;
  profiles.reserve(nodes.size());
  for (std::size_t i : nodes) profiles.push_back(graph.node(i));
  DiversityGraph sub(std::move(profiles));
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      sub.set_pair(a, b, graph.inter(nodes[a], nodes[b]), graph.weight(nodes[a], nodes[b]));
    }
  }
  return sub;
}

std::vector<std::pair<std::size_t, std::size_t>> top_edges(const DiversityGraph& graph, std::int64_t l) {
  if (l <= 0) throw Error(ErrorKind::validation, "top-L requires L >= 1");
  const std::size_t n = graph.size();
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(graph.edge_count());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  }
  auto id_pair = [&](const std::pair<std::size_t, std::size_t>& e) {
    const auto& a = graph.node(e.first).scene_id;
    const auto& b = graph.node(e.second).scene_id;
    return a < b ? std::pair<const std::string&, const std::string&>(a, b)
                 : std::pair<const std::string&, const std::string&>(b, a);
  };
  auto heavier = [&](const auto& x, const auto& y) {
    const double wx = graph.weight(x.first, x.second);
    const double wy = graph.weight(y.first, y.second);
    if (wx != wy) return wx > wy;
    return id_pair(x) < id_pair(y);
  };
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(l), edges.size());
  std::partial_sort(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(keep), edges.end(), heavier);
  edges.resize(keep);
  return edges;
}

DiversityGraph top_l_pool(const DiversityGraph& graph, std::int64_t l) {
  if (l <= 0) throw Error(ErrorKind::validation, "top-L requires L >= 1");
  if (graph.edge_count() == 0) throw Error(ErrorKind::validation, "top-L on a graph without edges");
  std::vector<bool> used(graph.size(), false);
  for (const auto& [i, j] : top_edges(graph, l)) used[i] = used[j] = true;
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (used[i]) nodes.push_back(i);
  }
  return induced_subgraph(graph, nodes);
}

}  // namespace seedpick
