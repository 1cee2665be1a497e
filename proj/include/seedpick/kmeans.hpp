#pragma once

#include <cstdint>
#include <vector>

#include "seedpick/matrix.hpp"

namespace seedpick {

struct KMeansConfig {
  std::size_t k = 1;
  std::size_t max_iterations = 100;
  std::uint64_t rng_seed = 0;
  double convergence_tol = 1e-10;  // max center displacement (Euclidean)
};

struct KMeansResult {
  Matrix<double> centers;                // k_eff x D
  std::vector<std::size_t> assignment;   // per input row
  std::size_t iterations = 0;
  double inertia = 0.0;                  // sum of squared distances to assigned centers
};

/// Lloyd's algorithm with k-means++ seeding.
///
/// k_eff = min(cfg.k, number of distinct rows). Assignment uses squared
/// Euclidean distance with ties going to the lower center index; every
/// returned center is the mean of its assigned rows. A cluster that empties
/// is re-seeded at the row farthest from its nearest center. Output is a pure
/// function of (points, cfg).
KMeansResult kmeans(const Matrix<float>& points, const KMeansConfig& cfg);
KMeansResult kmeans(const Matrix<double>& points, const KMeansConfig& cfg);

std::size_t count_distinct_rows(const Matrix<float>& points);
std::size_t count_distinct_rows(const Matrix<double>& points);

}  // namespace seedpick
