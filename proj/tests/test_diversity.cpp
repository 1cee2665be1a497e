#include <doctest.h>

#include <cmath>

#include "seedpick/diversity.hpp"
#include "seedpick/error.hpp"
#include "seedpick/synthetic.hpp"
#include "test_support.hpp"

using namespace seedpick;
using seedpick::testing::centers_of;
using seedpick::testing::rows_of;

namespace {

// Reference formulas written straight from the definitions.
double naive_intra(const Matrix<double>& c) {
  const std::size_t k = c.rows();
  if (k < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double d = 0.0;
      for (std::size_t j = 0; j < c.cols(); ++j) d += c(a, j) * c(b, j);
      sum += 1.0 - d;
    }
  }
  return 2.0 / (static_cast<double>(k) * static_cast<double>(k - 1)) * sum;
}

double naive_inter(const Matrix<double>& a, const Matrix<double>& b) {
  double sum = 0.0;
  for (std::size_t x = 0; x < a.rows(); ++x) {
    for (std::size_t y = 0; y < b.rows(); ++y) {
      double d = 0.0;
      for (std::size_t j = 0; j < a.cols(); ++j) d += a(x, j) * b(y, j);
      sum += 1.0 - d;
    }
  }
  return sum / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

bool close_rel(double got, double want, double rel = 1e-9) {
  return std::abs(got - want) <= rel * std::max(std::abs(want), 1e-6);
}

// Centers as means of random unit vectors, like k-means output.
Matrix<double> random_centers(Rng& rng, std::size_t k, std::size_t dim) {
  Matrix<double> c(k, dim);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t members = 1 + rng.below(4);
    for (std::size_t m = 0; m < members; ++m) {
      const auto u = seedpick::testing::random_unit(rng, dim);
      for (std::size_t j = 0; j < dim; ++j) c(r, j) += u[j] / static_cast<double>(members);
    }
  }
  return c;
}

}  // namespace

TEST_CASE("intra-diversity hand values") {
  CHECK(intra_diversity(centers_of({{1, 0}, {1, 0}})) == 0.0);
  CHECK(intra_diversity(centers_of({{1, 0}, {0, 1}})) == 1.0);
  CHECK(intra_diversity(centers_of({{1, 0}, {0, 1}, {-1, 0}})) == 4.0 / 3.0);
  CHECK(naive_intra(centers_of({{1, 0}, {0, 1}, {-1, 0}})) == 4.0 / 3.0);
  CHECK(intra_diversity(centers_of({{0.3, 0.4}})) == 0.0);
}

TEST_CASE("inter-diversity hand values") {
  const auto a = make_profile("a", 1, centers_of({{1, 0}}));
  const auto b = make_profile("b", 1, centers_of({{0, 1}}));
  const auto c = make_profile("c", 1, centers_of({{1, 0}, {0, 1}}));
  const auto d = make_profile("d", 1, centers_of({{-1, 0}}));
  CHECK(inter_diversity(a, a) == 0.0);
  CHECK(inter_diversity(a, b) == 1.0);
  CHECK(inter_diversity(c, d) == 1.5);
  CHECK(inter_diversity(d, c) == 1.5);
  const auto e = make_profile("e", 1, centers_of({{1, 0, 0}}));
  CHECK_THROWS_AS(inter_diversity(a, e), Error);
}

TEST_CASE("diversities agree with double-loop references on random profiles") {
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t dim = 2 + rng.below(30);
    const auto ca = random_centers(rng, 1 + rng.below(19), dim);
    const auto cb = random_centers(rng, 1 + rng.below(19), dim);
    const auto pa = make_profile("a", 1, ca);
    const auto pb = make_profile("b", 1, cb);
    const double ia = intra_diversity(ca);
    const double ab = inter_diversity(pa, pb);
    CHECK(close_rel(ia, naive_intra(ca)));
    CHECK(close_rel(ab, naive_inter(ca, cb)));
    CHECK(ab == inter_diversity(pb, pa));
    CHECK((ia >= 0.0 && ia <= 2.0));
    CHECK((ab >= 0.0 && ab <= 2.0));
  }
}

TEST_CASE("center order does not change intra-diversity when centers are the points") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto c = random_centers(rng, 6, 5);
    Matrix<double> rev(6, 5);
    for (std::size_t r = 0; r < 6; ++r) std::copy(c.row(5 - r).begin(), c.row(5 - r).end(), rev.row(r).begin());
    CHECK(close_rel(intra_diversity(c), intra_diversity(rev)));
  }
}

TEST_CASE("graph of single-view scenes has zero weights") {
  FeaturePack p;
  p.dimension = 2;
  p.scenes.push_back({"a", "", 1, rows_of({{1.0f, 0.0f}})});
  p.scenes.push_back({"b", "", 1, rows_of({{0.0f, 1.0f}})});
  const auto g = build_graph(p, {3, 50, 0, 1e-10});
  CHECK(g.node(0).intra_diversity == 0.0);
  CHECK(g.node(1).k_eff == 1);
  CHECK(g.edge_count() == 1);
  CHECK(g.weight(0, 1) == 0.0);
  CHECK(g.inter(0, 1) == 1.0);
}

TEST_CASE("graph edges match hand-computed d_ij d_i d_j") {
  // K equals the view count, so the centers are the views themselves.
  FeaturePack p;
  p.dimension = 2;
  p.scenes.push_back({"a", "", 1, rows_of({{1.0f, 0.0f}, {0.0f, 1.0f}})});               // d = 1
  p.scenes.push_back({"b", "", 1, rows_of({{1.0f, 0.0f}, {0.0f, 1.0f}, {-1.0f, 0.0f}})});  // d = 4/3
  p.scenes.push_back({"c", "", 1, rows_of({{0.0f, 1.0f}, {0.0f, -1.0f}})});              // d = 2
  const auto g = build_graph(p, {3, 100, 5, 1e-12});
  CHECK(g.node(0).intra_diversity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.node(1).intra_diversity == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(g.node(2).intra_diversity == doctest::Approx(2.0).epsilon(1e-12));
  // d_ab: centers {(1,0),(0,1)} vs {(1,0),(0,1),(-1,0)}: 6 pairs.
  const double d_ab = ((1 - 1) + (1 - 0) + (1 + 1) + (1 - 0) + (1 - 1) + (1 - 0)) / 6.0;
  const double d_ac = ((1 - 0) + (1 - 0) + (1 - 1) + (1 + 1)) / 4.0;
  const double d_bc = ((1 - 0) + (1 - 0) + (1 - 1) + (1 + 1) + (1 - 0) + (1 - 0)) / 6.0;
  CHECK(g.weight(0, 1) == doctest::Approx(d_ab * 1.0 * 4.0 / 3.0).epsilon(1e-9));
  CHECK(g.weight(0, 2) == doctest::Approx(d_ac * 1.0 * 2.0).epsilon(1e-9));
  CHECK(g.weight(1, 2) == doctest::Approx(d_bc * 4.0 / 3.0 * 2.0).epsilon(1e-9));
}

TEST_CASE("graph invariants on a synthetic pack") {
  SyntheticConfig cfg;
  cfg.scenes = 30;
  cfg.dimension = 12;
  cfg.seed = 77;
  const auto pack = make_synthetic_pack(cfg);
  const auto g = build_graph(pack, {5, 100, 3, 1e-10}, 1);
  CHECK(g.edge_count() == 30 * 29 / 2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& n = g.node(i);
    CHECK((n.intra_diversity >= 0.0 && n.intra_diversity <= 2.0));
    CHECK(n.k_eff <= 5);
    if (n.k_eff < 2) CHECK(n.intra_diversity == 0.0);
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const double e = g.weight(i, j);
      CHECK(g.weight(j, i) == e);
      CHECK((g.inter(i, j) >= 0.0 && g.inter(i, j) <= 2.0));
      CHECK((e >= 0.0 && e <= 8.0));
      CHECK(close_rel(e, g.inter(i, j) * n.intra_diversity * g.node(j).intra_diversity));
      CHECK(close_rel(g.inter(i, j), naive_inter(n.centers, g.node(j).centers)));
    }
  }
}

TEST_CASE("graph does not depend on thread count or scene order") {
  SyntheticConfig cfg;
  cfg.scenes = 25;
  cfg.seed = 8;
  auto pack = make_synthetic_pack(cfg);
  const auto g1 = build_graph(pack, {4, 100, 11, 1e-10}, 1);
  const auto g4 = build_graph(pack, {4, 100, 11, 1e-10}, 4);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(g1.node(i).centers == g4.node(i).centers);
    for (std::size_t j = i + 1; j < g1.size(); ++j) CHECK(g1.weight(i, j) == g4.weight(i, j));
  }
  std::reverse(pack.scenes.begin(), pack.scenes.end());
  const auto gr = build_graph(pack, {4, 100, 11, 1e-10}, 2);
  const std::size_t n = g1.size();
  CHECK(gr.node(n - 1).centers == g1.node(0).centers);
  CHECK(gr.weight(n - 1, n - 2) == g1.weight(0, 1));
}

TEST_CASE("graph JSON dump round-trips") {
  const auto g = build_graph(make_demo_pack(), {3, 100, 1, 1e-10});
  const auto back = graph_from_json(nlohmann::json::parse(graph_to_json(g).dump()));
  REQUIRE(back.size() == g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(back.node(i).scene_id == g.node(i).scene_id);
    CHECK(back.node(i).intra_diversity == g.node(i).intra_diversity);
    CHECK(back.node(i).k_eff == g.node(i).k_eff);
    for (std::size_t j = i + 1; j < g.size(); ++j) CHECK(back.weight(i, j) == g.weight(i, j));
  }
  auto broken = graph_to_json(g);
  broken["edges"].erase(broken["edges"].begin());
  CHECK_THROWS_AS(graph_from_json(broken), Error);
}
