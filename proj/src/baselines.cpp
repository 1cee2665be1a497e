#include "seedpick/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "seedpick/error.hpp"
#include "seedpick/kmeans.hpp"
#include "seedpick/rng.hpp"

namespace seedpick {

namespace {

struct Clustering {
  Matrix<double> points;
  Matrix<double> centers;
};

Clustering cluster_means(const std::vector<SceneMeanFeature>& means, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw Error(ErrorKind::validation, "baseline requires K >= 1");
  const std::size_t dim = means.front().mean.size();
  Matrix<double> points(means.size(), dim);
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (means[i].mean.size() != dim) throw Error(ErrorKind::validation, "scene means of mixed dimension");
    std::copy(means[i].mean.begin(), means[i].mean.end(), points.row(i).begin());
  }
  KMeansConfig cfg;
  cfg.k = k;
  cfg.rng_seed = seed;
  auto km = kmeans(points, cfg);
  return {std::move(points), std::move(km.centers)};
}

// Accumulates picks in order, then trims the most costly until within budget.
class Picker {
 public:
  Picker(const std::vector<std::uint64_t>& costs) : costs_(costs), taken_(costs.size(), false) {}

  bool taken(std::size_t i) const { return taken_[i]; }
  bool exhausted() const { return order_.size() == costs_.size(); }
  std::uint64_t cost() const { return cost_; }

  void add(std::size_t i) {
    taken_[i] = true;
    order_.push_back(i);
    cost_ += costs_[i];
  }

  std::vector<std::size_t> trimmed(std::uint64_t budget) {
    while (cost_ > budget) {
      std::size_t worst = 0;
      for (std::size_t p = 1; p < order_.size(); ++p) {
        if (costs_[order_[p]] >= costs_[order_[worst]]) worst = p;
      }
      cost_ -= costs_[order_[worst]];
      order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    std::vector<std::size_t> out = order_;
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  const std::vector<std::uint64_t>& costs_;
  std::vector<bool> taken_;
  std::vector<std::size_t> order_;
  std::uint64_t cost_ = 0;
};

// Per cluster, all scenes by distance to its centroid (ties by index).
std::vector<std::vector<std::size_t>> rankings(const Clustering& c) {
  std::vector<std::vector<std::size_t>> out(c.centers.rows());
  std::vector<double> d(c.points.rows());
  for (std::size_t k = 0; k < c.centers.rows(); ++k) {
    for (std::size_t i = 0; i < c.points.rows(); ++i) d[i] = squared_distance(c.points.row(i), c.centers.row(k));
    auto& r = out[k];
    r.resize(c.points.rows());
    std::iota(r.begin(), r.end(), 0);
    std::stable_sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  }
  return out;
}

void centroid_round(const std::vector<std::vector<std::size_t>>& ranks, std::vector<std::size_t>& cursor,
                    Picker& picker) {
  for (std::size_t k = 0; k < ranks.size() && !picker.exhausted(); ++k) {
    auto& pos = cursor[k];
    while (pos < ranks[k].size() && picker.taken(ranks[k][pos])) ++pos;
    if (pos < ranks[k].size()) picker.add(ranks[k][pos]);
  }
}

void check_inputs(const std::vector<SceneMeanFeature>& means, const std::vector<std::uint64_t>& costs) {
  if (means.size() != costs.size()) throw Error(ErrorKind::validation, "means and costs differ in length");
}

}  // namespace

std::vector<std::size_t> select_random(const std::vector<SceneCost>& scenes, std::uint64_t budget,
                                       std::uint64_t rng_seed) {
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(rng_seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
  }
  std::vector<std::size_t> out;
  std::uint64_t used = 0;
  for (std::size_t i : order) {
    if (scenes[i].cost <= budget - used) {
      used += scenes[i].cost;
      out.push_back(i);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> select_kmcentroid(const std::vector<SceneMeanFeature>& means,
                                           const std::vector<std::uint64_t>& costs, std::uint64_t budget,
                                           std::size_t k, std::uint64_t rng_seed) {
  check_inputs(means, costs);
  if (means.empty()) return {};
  const auto clustering = cluster_means(means, k, rng_seed);
  const auto ranks = rankings(clustering);
  std::vector<std::size_t> cursor(ranks.size(), 0);
  Picker picker(costs);
  while (picker.cost() < budget && !picker.exhausted()) centroid_round(ranks, cursor, picker);
  return picker.trimmed(budget);
}

std::vector<std::size_t> select_kmfurthest(const std::vector<SceneMeanFeature>& means,
                                           const std::vector<std::uint64_t>& costs, std::uint64_t budget,
                                           std::size_t k, std::uint64_t rng_seed) {
  check_inputs(means, costs);
  if (means.empty()) return {};
  const auto clustering = cluster_means(means, k, rng_seed);
  const auto ranks = rankings(clustering);
  std::vector<std::size_t> cursor(ranks.size(), 0);
  Picker picker(costs);
  if (picker.cost() < budget) centroid_round(ranks, cursor, picker);

  const std::size_t n = means.size();
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < clustering.centers.rows(); ++c) {
      min_d[i] = std::min(min_d[i], squared_distance(clustering.points.row(i), clustering.centers.row(c)));
    }
  }
  while (picker.cost() < budget && !picker.exhausted()) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!picker.taken(i) && (pick == n || min_d[i] > min_d[pick])) pick = i;
    }
    picker.add(pick);
  }
  return picker.trimmed(budget);
}

}  // namespace seedpick
