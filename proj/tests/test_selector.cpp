#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "seedpick/error.hpp"
#include "seedpick/selector.hpp"
#include "test_support.hpp"

using namespace seedpick;
using seedpick::testing::hand_graph;
using seedpick::testing::random_graph;

namespace {

// Costs a..f = 4 3 5 2 6 3. Optima below were enumerated independently.
DiversityGraph six_scene_graph() {
  std::vector<std::vector<double>> w(6, std::vector<double>(6, 0.0));
  auto set = [&](char x, char y, double v) { w[x - 'a'][y - 'a'] = v; };
  set('a', 'b', .9), set('a', 'c', .4), set('a', 'd', .7), set('a', 'e', .2), set('a', 'f', .5);
  set('b', 'c', .8), set('b', 'd', .3), set('b', 'e', .6), set('b', 'f', .1);
  set('c', 'd', .2), set('c', 'e', .9), set('c', 'f', .7);
  set('d', 'e', .4), set('d', 'f', .8);
  set('e', 'f', .6);
  return hand_graph({4, 3, 5, 2, 6, 3}, w);
}

std::uint64_t total_cost(const DiversityGraph& g) {
  std::uint64_t s = 0;
  for (const auto& n : g.nodes()) s += n.cost;
  return s;
}

}  // namespace

TEST_CASE("brute force on the six-scene instance") {
  const auto g = six_scene_graph();
  struct Case {
    std::uint64_t budget;
    std::vector<std::string> ids;
    double objective;
  };
  const std::vector<Case> cases = {
      {0, {}, 0.0},
      {5, {"d", "f"}, 0.8},
      {9, {"a", "d", "f"}, 2.0},
      {10, {"a", "d", "f"}, 2.0},
      {13, {"a", "b", "d", "f"}, 3.3},
      {23, {"a", "b", "c", "d", "e", "f"}, 8.1},
  };
  for (const auto& c : cases) {
    CAPTURE(c.budget);
    const auto r = brute_force_select({g, c.budget});
    CHECK(r.selected_ids == c.ids);
    CHECK(r.objective == doctest::Approx(c.objective).epsilon(1e-12));
    CHECK(r.status == ProofStatus::optimal);
    const auto s = solve({g, c.budget});
    CHECK(s.objective == r.objective);
  }
}

TEST_CASE("brute force boundaries") {
  Rng rng(6);
  const auto g = random_graph(rng, 9, 5, 50);
  const auto all = brute_force_select({g, total_cost(g)});
  CHECK(all.selected.size() == 9);
  std::uint64_t min_cost = UINT64_MAX;
  for (const auto& n : g.nodes()) min_cost = std::min(min_cost, n.cost);
  const auto none = brute_force_select({g, min_cost - 1});
  CHECK(none.selected.empty());
  CHECK(none.objective == 0.0);

  const auto big = random_graph(rng, 26);
  try {
    brute_force_select({big, 100});
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::refusal);
  }
}

TEST_CASE("exact solve equals brute force on random instances") {
  Rng rng(123);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(12);
    const auto g = random_graph(rng, n);
    const std::uint64_t budget = rng.below(total_cost(g) + 1);
    CAPTURE(t);
    const auto oracle = brute_force_select({g, budget});
    const auto r = solve({g, budget});
    CHECK(r.objective == oracle.objective);
    CHECK(r.total_cost <= budget);
    CHECK(r.status == ProofStatus::optimal);
    CHECK(r.gap <= 1e-9);
    CHECK(r.objective == selection_objective(g, r.selected));
    CHECK(check_linearization(g, r).violations == 0);
  }
}

TEST_CASE("single scene and mutually exclusive pairs") {
  const auto one = hand_graph({5}, {{0}});
  const auto r1 = solve({one, 5});
  CHECK(r1.selected_ids == std::vector<std::string>{"a"});
  CHECK(r1.objective == 0.0);
  CHECK(solve({one, 4}).selected.empty());

  const auto two = hand_graph({7, 7}, {{0, 0.9}, {0, 0}});
  const auto r2 = solve({two, 7});
  CHECK(r2.selected_ids == std::vector<std::string>{"a"});
  CHECK(r2.objective == 0.0);
  CHECK(r2.status == ProofStatus::optimal);
}

TEST_CASE("anytime mode validation and contract") {
  Rng rng(9);
  const auto g = random_graph(rng, 60, 10, 100);
  SolveOptions bad{SolveMode::anytime, 0.0, 0.0, 0};
  CHECK_THROWS_AS(solve({g, 500, bad}), Error);

  SolveOptions quick{SolveMode::anytime, 1.0, 0.0, 5};
  const auto r = solve({g, 500, quick});
  CHECK(r.total_cost <= 500);
  CHECK(r.objective <= r.upper_bound);
  CHECK(r.gap >= 0.0);
  CHECK(r.stats.nodes <= 5);
  CHECK(std::is_sorted(r.incumbent_trace.begin(), r.incumbent_trace.end()));
  CHECK(check_linearization(g, r).violations == 0);

  const auto again = solve({g, 500, quick});
  CHECK(again.selected == r.selected);
  CHECK(again.upper_bound == r.upper_bound);
}

TEST_CASE("anytime with ample budget proves the exact optimum") {
  Rng rng(44);
  const auto g = random_graph(rng, 14);
  const std::uint64_t budget = total_cost(g) / 3;
  const auto exact = solve({g, budget});
  const auto any = solve({g, budget, {SolveMode::anytime, 1000.0, 0.0, 0}});
  CHECK(any.status == ProofStatus::optimal);
  CHECK(any.objective == exact.objective);
  CHECK(exact.objective == brute_force_select({g, budget}).objective);
}

TEST_CASE("oracle optimum is monotone in budget and attained by a maximal set") {
  Rng rng(77);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 3 + rng.below(8);
    const auto g = random_graph(rng, n);
    double prev = -1.0;
    for (std::uint64_t b = 0; b <= total_cost(g); b += 1 + total_cost(g) / 12) {
      const auto r = brute_force_select({g, b});
      CHECK(r.objective >= prev);
      prev = r.objective;
      // Extending the optimum with any affordable scene keeps the optimum.
      std::vector<std::size_t> ext = r.selected;
      std::uint64_t used = r.total_cost;
      for (std::size_t i = 0; i < n; ++i) {
        if (std::find(ext.begin(), ext.end(), i) == ext.end() && g.node(i).cost <= b - used) {
          ext.push_back(i);
          used += g.node(i).cost;
        }
      }
      std::sort(ext.begin(), ext.end());
      CHECK(selection_objective(g, ext) >= r.objective);
      const auto s = solve({g, b});
      for (std::size_t i = 0; i < n; ++i) {
        const bool in = std::find(s.selected.begin(), s.selected.end(), i) != s.selected.end();
        if (!in) CHECK(g.node(i).cost > b - s.total_cost);
      }
    }
  }
}

TEST_CASE("greedy top pairs") {
  // a..e costs 3 2 4 1 5
  std::vector<std::vector<double>> w(5, std::vector<double>(5, 0.0));
  w[0][1] = .5, w[0][2] = .9, w[0][3] = .2, w[0][4] = .7;
  w[1][2] = .1, w[1][3] = .8, w[1][4] = .3;
  w[2][3] = .4, w[2][4] = .6;
  const auto g = hand_graph({3, 2, 4, 1, 5}, w);
  // (a,c) takes a and c (7); (b,d): b no longer fits, d does (8).
  CHECK(select_greedy_top_pairs(g, 8) == std::vector<std::size_t>{0, 2, 3});
  CHECK(select_greedy_top_pairs(g, 0).empty());
  CHECK(select_greedy_top_pairs(g, 1000).size() == 5);

  const auto iso = hand_graph({1, 1, 1}, {{0, 0.4, 0}, {0, 0, 0}, {0, 0, 0}});
  CHECK(select_greedy_top_pairs(iso, 100) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("feasibility over random instances") {
  Rng rng(5150);
  for (int t = 0; t < 30; ++t) {
    const auto g = random_graph(rng, 20 + rng.below(40));
    const std::uint64_t b = rng.below(total_cost(g) / 2 + 1);
    const auto r = solve({g, b, {SolveMode::anytime, 1.0, 0.0, 50}});
    CHECK(r.total_cost <= b);
    CHECK(selection_cost(g, r.selected) == r.total_cost);
    CHECK(selection_cost(g, select_greedy_top_pairs(g, b)) <= b);
  }
}

TEST_CASE("result JSON schema") {
  const auto g = six_scene_graph();
  const auto j = to_json(solve({g, 10}), "diversity_blp");
  CHECK(j["method"] == "diversity_blp");
  CHECK(j["selected"] == nlohmann::json({"a", "d", "f"}));
  CHECK(j["proof_status"] == "optimal");
  CHECK(j["total_cost"] == 9);
  CHECK(j["solver_stats"].contains("nodes"));
  const auto h = to_json(evaluate_selection(g, {0, 1}), "random");
  CHECK(h["upper_bound"].is_null());
  CHECK(h["objective"].get<double>() == doctest::Approx(0.9));
}
