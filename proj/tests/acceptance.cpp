// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

#include "seedpick/diversity.hpp"
#include "seedpick/graph_reduce.hpp"
#include "seedpick/pipeline.hpp"
#include "seedpick/selector.hpp"
#include "seedpick/synthetic.hpp"
#include "test_support.hpp"

using namespace seedpick;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::uint64_t total_cost(const DiversityGraph& g) {
  std::uint64_t s = 0;
  for (const auto& n : g.nodes()) s += n.cost;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "seedpick");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

std::size_t linearization_violations = 0;
std::size_t linearization_outputs = 0;

void track_linearization(const DiversityGraph& g, const SelectionResult& r) {
  linearization_violations += check_linearization(g, r).violations;
  ++linearization_outputs;
}

void oracle_exactness() {
  Rng rng(20240601);
  const auto t0 = Clock::now();
  int matched = 0, feasible = 0;
  const int trials = 250;
  for (int t = 0; t < trials; ++t) {
    const std::size_t m = 2 + rng.below(14);
    const auto g = testing::random_graph(rng, m, 1, 100);
    const std::uint64_t budget = rng.below(total_cost(g) + 1);
    const auto oracle = brute_force_select({g, budget});
    const auto r = solve({g, budget});
    track_linearization(g, oracle);
    track_linearization(g, r);
    matched += r.objective == oracle.objective;
    feasible += r.total_cost <= budget;
  }
  const double secs = seconds_since(t0);
  report(matched == trials && feasible == trials && secs < 60.0, "oracle_exactness",
         fmt("%d/%d objectives equal, %d/%d within budget, %.2f s", matched, trials, feasible, trials, secs));
}

double naive_intra(const Matrix<double>& c) {
  const std::size_t k = c.rows();
  if (k < 2) return 0.0;
  double s = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      double d = 0.0;
      for (std::size_t x = 0; x < c.cols(); ++x) d += c(a, x) * c(b, x);
      s += 1.0 - d;
    }
  }
  return s / static_cast<double>(k * (k - 1));
}

double naive_inter(const Matrix<double>& a, const Matrix<double>& b) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p) {
    for (std::size_t q = 0; q < b.rows(); ++q) {
      double d = 0.0;
      for (std::size_t x = 0; x < a.cols(); ++x) d += a(p, x) * b(q, x);
      s += 1.0 - d;
    }
  }
  return s / static_cast<double>(a.rows() * b.rows());
}

bool close(double got, double want) {
  return std::abs(got - want) <= 1e-9 * std::max(std::abs(want), 1e-6);
}

void diversity_correctness() {
  Rng rng(7);
  std::vector<ClusterProfile> profiles;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t dim = 2 + rng.below(30);
    const std::size_t k = 1 + rng.below(8);
    Matrix<double> c(k, dim);
    for (std::size_t r = 0; r < k; ++r) {
      const auto u = testing::random_unit(rng, dim);
      std::copy(u.begin(), u.end(), c.row(r).begin());
    }
    profiles.push_back(make_profile("p" + std::to_string(t), 1, std::move(c)));
  }
  int intra_ok = 0, inter_ok = 0, inter_total = 0, in_range = 0, values = 0;
  for (std::size_t t = 0; t < profiles.size(); ++t) {
    const auto& p = profiles[t];
    const double d = intra_diversity(p.centers);
    intra_ok += close(d, naive_intra(p.centers));
    in_range += d >= 0.0 && d <= 2.0;
    ++values;
    // Pair with the next profile of the same dimension.
    for (std::size_t u = t + 1; u < profiles.size(); ++u) {
      if (profiles[u].centers.cols() != p.centers.cols()) continue;
      const double e = inter_diversity(p, profiles[u]);
      inter_ok += close(e, naive_inter(p.centers, profiles[u].centers));
      in_range += e >= 0.0 && e <= 2.0;
      ++inter_total, ++values;
      break;
    }
  }
  const double hand = intra_diversity(testing::centers_of({{1, 0}, {0, 1}, {-1, 0}}));
  const bool hand_ok = std::abs(hand - 4.0 / 3.0) <= 1e-15;
  report(intra_ok == 1000 && inter_ok == inter_total && in_range == values && hand_ok, "diversity_correctness",
         fmt("intra %d/1000, inter %d/%d within 1e-9, %d/%d in [0,2], hand %.17g", intra_ok, inter_ok, inter_total,
             in_range, values, hand));
}

void linearization_identity() {
  report(linearization_violations == 0 && linearization_outputs > 0, "linearization_identity",
         fmt("%zu violations over %zu solver outputs", linearization_violations, linearization_outputs));
}

FrameSequence random_sequence(Rng& rng, const std::string& id, std::size_t len, std::size_t dim) {
  FrameSequence seq{id, {}};
  auto cur = testing::random_unit(rng, dim);
  for (std::size_t f = 0; f < len; ++f) {
    const double step = 0.1 + 0.8 * rng.uniform();
    for (double& x : cur) x += step * rng.normal() / std::sqrt(static_cast<double>(dim));
    seq.frames.push_back({id + "_" + std::to_string(f), cur});
  }
  return seq;
}

void sparsification() {
  Rng rng(99);
  int ok = 0, idempotent = 0;
  const double thr = 0.75;
  for (int t = 0; t < 100; ++t) {
    const auto seq = random_sequence(rng, "q" + std::to_string(t), 5 + rng.below(60), 8 + rng.below(24));
    const auto kept = sparsify_sequences(FramePool{{seq}}, {thr});
    const std::set<std::string> kept_set(kept.begin(), kept.end());
    bool good = !kept.empty() && kept.front() == seq.frames.front().frame_id;
    std::size_t ref = 0;
    for (std::size_t f = 1; f < seq.frames.size(); ++f) {
      const double s = cosine_similarity(seq.frames[ref].mean, seq.frames[f].mean);
      if (kept_set.contains(seq.frames[f].frame_id)) {
        good = good && s <= thr;
        ref = f;
      } else {
        good = good && s > thr;
      }
    }
    ok += good;
    FrameSequence again{seq.sequence_id, {}};
    for (const auto& fr : seq.frames) {
      if (kept_set.contains(fr.frame_id)) again.frames.push_back(fr);
    }
    idempotent += sparsify_sequences(FramePool{{again}}, {thr}) == kept;
  }
  const auto pack = make_redundant_sequence_pack(20, 49, 32, 11);
  const auto report_r = sparsify_report(make_frame_pool(pack), {thr});
  const double reduction = 1.0 - static_cast<double>(report_r.retained.size()) / static_cast<double>(pack.scenes.size());
  report(ok == 100 && idempotent == 100 && reduction >= 0.90, "sparsification_invariants",
         fmt("%d/100 invariant, %d/100 idempotent, redundant sequence %zu -> %zu frames (%.1f%% reduction)", ok,
             idempotent, pack.scenes.size(), report_r.retained.size(), 100.0 * reduction));
}

void top_l_reduction() {
  Rng rng(4242);
  int pool_ok = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + rng.below(40);
    auto g = testing::random_graph(rng, n);
    // Coarse weights so ties actually occur.
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double w = std::round(g.weight(i, j) * 8.0) / 8.0;
        g.set_pair(i, j, g.inter(i, j), w);
      }
    }
    const std::int64_t total = static_cast<std::int64_t>(n * (n - 1) / 2);
    const std::int64_t l = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total)));
    std::vector<std::tuple<double, std::string, std::string>> edges;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        auto a = g.node(i).scene_id, b = g.node(j).scene_id;
        if (b < a) std::swap(a, b);
        edges.emplace_back(-g.weight(i, j), a, b);
      }
    }
    std::sort(edges.begin(), edges.end());
    std::set<std::string> want;
    for (std::int64_t e = 0; e < l; ++e) {
      want.insert(std::get<1>(edges[e]));
      want.insert(std::get<2>(edges[e]));
    }
    const auto reduced = top_l_pool(g, l);
    std::set<std::string> got;
    for (const auto& node : reduced.nodes()) got.insert(node.scene_id);
    pool_ok += got == want && reduced.size() == want.size();
  }
  int solve_ok = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.below(14);
    const auto g = testing::random_graph(rng, n);
    const std::uint64_t budget = rng.below(total_cost(g) + 1);
    const auto reduced = top_l_pool(g, static_cast<std::int64_t>(g.edge_count()));
    const auto full = solve({g, budget});
    const auto part = solve({reduced, budget});
    track_linearization(reduced, part);
    solve_ok += part.objective == full.objective && part.selected_ids == full.selected_ids;
  }
  report(pool_ok == 100 && solve_ok == 50, "top_l_reduction",
         fmt("%d/100 pools match the reference sort, %d/50 full-L solves equal", pool_ok, solve_ok));
}

std::filesystem::path scale_pack(const std::filesystem::path& dir, std::uint64_t& budget) {
  SyntheticConfig sc;
  sc.scenes = 1000;
  sc.dimension = 64;
  sc.vocabulary = 48;
  sc.seed = 1000;
  const auto pack = make_synthetic_pack(sc);
  std::uint64_t total = 0;
  for (const auto& s : pack.scenes) total += s.cost;
  budget = total * 3 / 100;
  const auto path = dir / "scale.sfp";
  write_pack(pack, path);
  return path;
}

void scale_envelope(const std::filesystem::path& work) {
  std::uint64_t budget = 0;
  const auto pack = scale_pack(work, budget);
  const auto out = work / "scale";
  const auto t0 = Clock::now();
  const int code = cli({"select", "--pack", pack.string(), "--budget", std::to_string(budget), "--k", "8", "--top-l",
                        "1000", "--mode", "anytime", "--time-limit", "120", "--gap", "0", "--seed", "1", "--out",
                        out.string()});
  const double secs = seconds_since(t0);
  if (code != 0) {
    report(false, "scale_envelope", fmt("select exited with %d", code));
    return;
  }
  const auto seed = nlohmann::json::parse(slurp(out / "seed.json"));
  const auto log = nlohmann::json::parse(slurp(out / "run_log.json"));
  const double gap = seed["gap"].get<double>();
  report(secs < 300.0 && gap <= 0.05, "scale_envelope",
         fmt("M=1000 D=64 L=1000 budget=%llu: %.1f s, gap %.4f, %s, pool %d scenes, %llu nodes",
             static_cast<unsigned long long>(budget), secs, gap, seed["proof_status"].get<std::string>().c_str(),
             log["reduce"]["nodes"].get<int>(), seed["solver_stats"]["nodes"].get<unsigned long long>()));
}

void determinism(const std::filesystem::path& work) {
  SyntheticConfig sc;
  sc.scenes = 150;
  sc.dimension = 32;
  sc.seed = 77;
  const auto pack = work / "det.sfp";
  write_pack(make_synthetic_pack(sc), pack);
  std::vector<std::string> seeds;
  for (int run = 0; run < 3; ++run) {
    const auto out = work / ("det" + std::to_string(run));
    const int code = cli({"select", "--pack", pack.string(), "--budget", "20000", "--k", "4", "--top-l", "200",
                          "--mode", "anytime", "--time-limit", "0.5", "--seed", "3", "--threads",
                          run == 1 ? "1" : "0", "--out", out.string()});
    seeds.push_back(code == 0 ? slurp(out / "seed.json") : std::string{});
  }
  const bool ok = !seeds[0].empty() && seeds[0] == seeds[1] && seeds[1] == seeds[2];
  report(ok, "determinism", fmt("3 anytime runs, seed.json %s (%zu bytes)", ok ? "identical" : "differs", seeds[0].size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seedpick acceptance checks"};
  std::string work = "acceptance_work";
  app.add_option("--work-dir", work, "Scratch directory");
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(work);

  oracle_exactness();
  diversity_correctness();
  sparsification();
  top_l_reduction();
  linearization_identity();
  scale_envelope(work);
  determinism(work);

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
