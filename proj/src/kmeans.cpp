#include "seedpick/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "seedpick/error.hpp"
#include "seedpick/rng.hpp"

namespace seedpick {

namespace {

template <typename T>
std::size_t distinct_rows(const Matrix<T>& points) {
  if (points.rows() == 0) return 0;
  std::vector<std::size_t> idx(points.rows());
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const auto ra = points.row(a);
    const auto rb = points.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(idx.begin(), idx.end(), less);
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (less(idx[i - 1], idx[i])) ++distinct;
  }
  return distinct;
}

template <typename T>
std::size_t nearest(const Matrix<double>& centers, std::span<const T> p, double& best_d2) {
  std::size_t best = 0;
  best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double d2 = squared_distance(p, centers.row(c));
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

template <typename T>
void set_center(Matrix<double>& centers, std::size_t c, std::span<const T> p) {
  auto dst = centers.row(c);
  for (std::size_t j = 0; j < p.size(); ++j) dst[j] = static_cast<double>(p[j]);
}

template <typename T>
Matrix<double> seed_plus_plus(const Matrix<T>& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix<double> centers(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t chosen = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0; c < k; ++c) {
    set_center(centers, c, points.row(chosen));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), centers.row(c)));
      total += d2[i];
    }
    if (c + 1 == k) break;
    // D^2 sampling; total > 0 because k <= distinct row count.
    const double target = rng.uniform() * total;
    double acc = 0.0;
    std::size_t pick = n;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      last_positive = i;
      acc += d2[i];
      if (acc > target) {
        pick = i;
        break;
      }
    }
    chosen = pick == n ? last_positive : pick;
  }
  return centers;
}

template <typename T>
KMeansResult run_kmeans(const Matrix<T>& points, const KMeansConfig& cfg) {
  if (cfg.k == 0) throw Error(ErrorKind::validation, "k-means requires k >= 1");
  if (cfg.max_iterations == 0) throw Error(ErrorKind::validation, "k-means requires max_iterations >= 1");
  if (points.rows() == 0) throw Error(ErrorKind::validation, "k-means on an empty point set");

  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  const std::size_t k = std::min(cfg.k, distinct_rows(points));

  Rng rng(cfg.rng_seed);
  KMeansResult res;
  res.centers = seed_plus_plus(points, k, rng);
  res.assignment.assign(n, std::numeric_limits<std::size_t>::max());

  std::vector<double> dist2(n);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    res.iterations = iter + 1;
    bool changed = false;

    // Assignment, repeated while empty clusters are being repaired. Each
    // repair pins an empty center onto a distinct point, so this terminates.
    for (std::size_t repair = 0; repair <= k; ++repair) {
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = nearest(res.centers, points.row(i), dist2[i]);
        if (c != res.assignment[i]) {
          res.assignment[i] = c;
          changed = true;
        }
        ++counts[c];
      }
      bool any_empty = false;
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        any_empty = true;
        const auto far = static_cast<std::size_t>(std::max_element(dist2.begin(), dist2.end()) - dist2.begin());
        set_center(res.centers, c, points.row(far));
        for (std::size_t i = 0; i < n; ++i) {
          dist2[i] = std::min(dist2[i], squared_distance(points.row(i), res.centers.row(c)));
        }
      }
      if (!any_empty) break;
    }

    Matrix<double> updated(k, dim);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = updated.row(res.assignment[i]);
      const auto src = points.row(i);
      for (std::size_t j = 0; j < dim; ++j) dst[j] += static_cast<double>(src[j]);
    }
    double max_move2 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      auto row = updated.row(c);
      if (counts[c] == 0) {
        std::copy(res.centers.row(c).begin(), res.centers.row(c).end(), row.begin());
        continue;
      }
      for (double& v : row) v /= static_cast<double>(counts[c]);
      max_move2 = std::max(max_move2, squared_distance(std::span<const double>(row), res.centers.row(c)));
    }
    res.centers = std::move(updated);
    if (!changed || max_move2 < cfg.convergence_tol * cfg.convergence_tol) break;
  }

  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res.inertia += squared_distance(points.row(i), res.centers.row(res.assignment[i]));
  }
  return res;
}

}  // namespace

KMeansResult kmeans(const Matrix<float>& points, const KMeansConfig& cfg) { return run_kmeans(points, cfg); }
KMeansResult kmeans(const Matrix<double>& points, const KMeansConfig& cfg) { return run_kmeans(points, cfg); }

std::size_t count_distinct_rows(const Matrix<float>& points) { return distinct_rows(points); }
std::size_t count_distinct_rows(const Matrix<double>& points) { return distinct_rows(points); }

}  // namespace seedpick
