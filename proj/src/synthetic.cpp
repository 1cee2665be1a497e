#include "seedpick/synthetic.hpp"

#include <cmath>
#include <string>

#include "seedpick/error.hpp"
#include "seedpick/rng.hpp"

namespace seedpick {

namespace {

std::vector<double> random_unit(Rng& rng, std::uint32_t dim) {
  std::vector<double> v(dim);
  double n2 = 0.0;
  while (n2 < 1e-12) {
    n2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      n2 += x * x;
    }
  }
  const double n = std::sqrt(n2);
  for (double& x : v) x /= n;
  return v;
}

void write_noisy_row(std::span<float> dst, const std::vector<double>& base, double noise, Rng& rng) {
  std::vector<double> v(base.size());
  double n2 = 0.0;
  while (n2 < 1e-12) {
    n2 = 0.0;
    for (std::size_t j = 0; j < base.size(); ++j) {
      v[j] = base[j] + noise * rng.normal();
      n2 += v[j] * v[j];
    }
  }
  const double n = std::sqrt(n2);
  for (std::size_t j = 0; j < base.size(); ++j) dst[j] = static_cast<float>(v[j] / n);
}

std::uint64_t in_range(Rng& rng, std::uint64_t lo, std::uint64_t hi) { return lo + rng.below(hi - lo + 1); }

}  // namespace

FeaturePack make_synthetic_pack(const SyntheticConfig& cfg) {
  if (cfg.dimension == 0 || cfg.vocabulary == 0 || cfg.min_modes == 0 || cfg.min_modes > cfg.max_modes ||
      cfg.min_views == 0 || cfg.min_views > cfg.max_views || cfg.min_cost > cfg.max_cost) {
    throw Error(ErrorKind::validation, "inconsistent synthetic pack configuration");
  }
  Rng rng(cfg.seed);
  std::vector<std::vector<double>> vocab;
  for (std::size_t v = 0; v < cfg.vocabulary; ++v) vocab.push_back(random_unit(rng, cfg.dimension));

  FeaturePack pack;
  pack.dimension = cfg.dimension;
  for (std::size_t s = 0; s < cfg.scenes; ++s) {
    ViewFeatureSet scene;
    scene.scene_id = "scene_" + std::to_string(s);
    scene.cost = cfg.cost_free ? 0 : in_range(rng, cfg.min_cost, cfg.max_cost);
    const auto modes = in_range(rng, cfg.min_modes, cfg.max_modes);
    std::vector<std::size_t> picked;
    for (std::uint64_t m = 0; m < modes; ++m) picked.push_back(static_cast<std::size_t>(rng.below(cfg.vocabulary)));
    const auto views = std::max<std::uint64_t>(in_range(rng, cfg.min_views, cfg.max_views), 1);
    scene.views = Matrix<float>(views, cfg.dimension);
    for (std::uint64_t r = 0; r < views; ++r) {
      const auto& base = vocab[picked[r % picked.size()]];
      write_noisy_row(scene.views.row(r), base, cfg.noise, rng);
    }
    pack.scenes.push_back(std::move(scene));
  }
  return pack;
}

FeaturePack make_demo_pack() {
  SyntheticConfig cfg;
  cfg.scenes = 8;
  cfg.dimension = 16;
  cfg.vocabulary = 12;
  cfg.min_modes = 1;
  cfg.max_modes = 5;
  cfg.min_views = 3;
  cfg.max_views = 10;
  cfg.seed = 20240601;
  return make_synthetic_pack(cfg);
}

FeaturePack make_redundant_sequence_pack(std::size_t novel, std::size_t duplicates, std::uint32_t dimension,
                                         std::uint64_t seed, const std::string& sequence_id) {
  Rng rng(seed);
  FeaturePack pack;
  pack.dimension = dimension;
  std::size_t frame = 0;
  std::vector<double> previous;
  for (std::size_t n = 0; n < novel; ++n) {
    // Keep consecutive novel frames clearly apart.
    std::vector<double> base = random_unit(rng, dimension);
    while (!previous.empty()) {
      double c = 0.0;
      for (std::size_t j = 0; j < dimension; ++j) c += base[j] * previous[j];
      if (c < 0.5) break;
      base = random_unit(rng, dimension);
    }
    for (std::size_t d = 0; d <= duplicates; ++d) {
      ViewFeatureSet scene;
      scene.scene_id = sequence_id + "_f" + std::to_string(frame++);
      scene.sequence_id = sequence_id;
      scene.cost = 1000;
      scene.views = Matrix<float>(1, dimension);
      write_noisy_row(scene.views.row(0), base, d == 0 ? 0.0 : 0.02, rng);
      pack.scenes.push_back(std::move(scene));
    }
    previous = base;
  }
  return pack;
}

}  // namespace seedpick
