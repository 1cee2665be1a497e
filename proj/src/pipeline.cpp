#include "seedpick/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "seedpick/baselines.hpp"
#include "seedpick/diversity.hpp"
#include "seedpick/feature_store.hpp"
#include "seedpick/graph_reduce.hpp"

namespace seedpick {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.kind(), e.what());
  } catch (const nlohmann::json::exception& e) {
    throw StageError(stage, ErrorKind::format, e.what());
  } catch (const std::bad_alloc&) {
    throw StageError(stage, ErrorKind::refusal, "out of memory");
  } catch (const std::exception& e) {
    throw StageError(stage, ErrorKind::io, e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

void ensure_out_dir(const std::filesystem::path& dir) {
  in_stage("write", [&] {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  });
}

std::string_view unit_name(BudgetUnit u) { return u == BudgetUnit::points ? "points" : "scenes"; }

std::string_view mode_name(SolveMode m) { return m == SolveMode::exact ? "exact" : "anytime"; }

void check_config(const PipelineConfig& cfg, bool needs_k) {
  in_stage("config", [&] {
    if (!cfg.budget) throw Error(ErrorKind::usage, "a budget is required");
    if (needs_k && cfg.k == 0) throw Error(ErrorKind::validation, "K must be at least 1");
    if (cfg.top_l <= 0) throw Error(ErrorKind::validation, "top-L requires L >= 1");
    if (cfg.kmeans_iterations == 0) throw Error(ErrorKind::validation, "k-means iterations must be positive");
    if (cfg.sparsify_threshold && !(*cfg.sparsify_threshold >= -1.0 && *cfg.sparsify_threshold <= 1.0)) {
      throw Error(ErrorKind::validation, "sparsify threshold must lie in [-1, 1]");
    }
    if (cfg.solver.mode == SolveMode::anytime && !(cfg.solver.time_limit_seconds > 0.0) && cfg.solver.node_limit == 0) {
      throw Error(ErrorKind::validation, "anytime mode needs a positive time limit");
    }
    if (!(cfg.solver.gap_tolerance >= 0.0)) throw Error(ErrorKind::validation, "gap must be nonnegative");
  });
}

struct Prepared {
  FeaturePack pack;
  nlohmann::json log;
  bool unit_costs = false;
};

// Load, cost-unit handling and optional sparsification.
Prepared prepare_pack(const PipelineConfig& cfg) {
  Prepared p;
  auto t0 = Clock::now();
  p.pack = in_stage("load", [&] { return load_pack(cfg.pack_path); });
  p.log["load"] = {{"path", cfg.pack_path.string()},
                   {"scenes", p.pack.scenes.size()},
                   {"dimension", p.pack.dimension},
                   {"cost_free", p.pack.cost_free()},
                   {"time_ms", ms_since(t0)}};

  p.unit_costs = cfg.budget_unit == BudgetUnit::scenes || p.pack.cost_free();
  if (p.unit_costs) {
    for (auto& s : p.pack.scenes) s.cost = 1;
  }
  p.log["budget"] = {{"value", *cfg.budget},
                     {"requested_unit", unit_name(cfg.budget_unit)},
                     {"effective_unit", p.unit_costs ? "scenes" : "points"}};
  if (p.pack.cost_free() && cfg.budget_unit == BudgetUnit::points) {
    p.log["notes"].push_back("pack is cost-free; budget interpreted as a scene count");
  }

  const bool sparsify = !cfg.no_sparsify && (cfg.sparsify_threshold.has_value() || p.pack.has_sequences());
  const double threshold = cfg.sparsify_threshold.value_or(kDefaultSparsifyThreshold);
  nlohmann::json slog = {{"enabled", sparsify}};
  if (sparsify) {
    t0 = Clock::now();
    const auto report = in_stage("sparsify", [&] {
      return sparsify_report(make_frame_pool(p.pack), SparsifyConfig{threshold});
    });
    p.pack = filter_pack(p.pack, report.retained);
    slog["threshold"] = threshold;
    slog["retained"] = report.retained.size();
    slog["dropped"] = report.dropped.size();
    slog["time_ms"] = ms_since(t0);
  }
  p.log["sparsify"] = slog;
  return p;
}

KMeansConfig kmeans_config(const PipelineConfig& cfg) {
  KMeansConfig km;
  km.k = cfg.k;
  km.max_iterations = cfg.kmeans_iterations;
  km.rng_seed = cfg.rng_seed;
  return km;
}

DiversityGraph graph_stage(const PipelineConfig& cfg, const FeaturePack& pack, nlohmann::json& log) {
  const auto t0 = Clock::now();
  auto graph = in_stage("graph", [&] { return build_graph(pack, kmeans_config(cfg), cfg.threads); });
  nlohmann::json flat = nlohmann::json::array();
  for (const auto& n : graph.nodes()) {
    if (n.k_eff < 2) flat.push_back(n.scene_id);
  }
  log["graph"] = {{"nodes", graph.size()},
                  {"edges", graph.edge_count()},
                  {"zero_diversity_scenes", flat},
                  {"time_ms", ms_since(t0)}};
  if (cfg.emit_graph) {
    in_stage("write", [&] { write_text(cfg.out_dir / "graph.json", dump_json(graph_to_json(graph))); });
  }
  return graph;
}

nlohmann::json parameters(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["k"] = cfg.k;
  j["top_l"] = cfg.top_l;
  j["budget"] = cfg.budget ? nlohmann::json(*cfg.budget) : nlohmann::json(nullptr);
  j["budget_unit"] = unit_name(cfg.budget_unit);
  j["sparsify_threshold"] =
      cfg.no_sparsify ? nlohmann::json("off")
                      : nlohmann::json(cfg.sparsify_threshold.value_or(kDefaultSparsifyThreshold));
  j["sparsify_auto"] = !cfg.no_sparsify && !cfg.sparsify_threshold.has_value();
  j["mode"] = mode_name(cfg.solver.mode);
  j["time_limit_s"] = cfg.solver.time_limit_seconds;
  j["node_limit"] = cfg.solver.mode == SolveMode::anytime ? cfg.solver.effective_node_limit() : 0;
  j["gap"] = cfg.solver.gap_tolerance;
  j["seed"] = cfg.rng_seed;
  j["kmeans_init"] = "k-means++";
  j["kmeans_iterations"] = cfg.kmeans_iterations;
  j["threads"] = cfg.threads;
  return j;
}

void write_outputs(const PipelineConfig& cfg, const PipelineOutput& out) {
  in_stage("write", [&] {
    write_text(cfg.out_dir / "seed.json", dump_json(out.seed));
    write_text(cfg.out_dir / "run_log.json", dump_json(out.run_log));
  });
}

nlohmann::json solver_log(const SelectionResult& r) {
  return {{"nodes", r.stats.nodes},
          {"prunes", r.stats.prunes},
          {"incumbent_updates", r.stats.incumbent_updates},
          {"search_size", r.stats.search_size},
          {"root_bound", r.stats.root_bound},
          {"time_ms", r.stats.time_ms},
          {"incumbent_trace", r.incumbent_trace}};
}

}  // namespace

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

PipelineOutput cmd_select(const PipelineConfig& cfg) {
  const bool offline = !cfg.graph_path.empty();
  check_config(cfg, !offline);
  ensure_out_dir(cfg.out_dir);
  const auto t_start = Clock::now();

  nlohmann::json log;
  DiversityGraph graph;
  if (offline) {
    graph = in_stage("load", [&] {
      std::ifstream in(cfg.graph_path);
      if (!std::filesystem::exists(cfg.graph_path)) throw Error(ErrorKind::not_found, "no such file: " + cfg.graph_path.string());
      return graph_from_json(nlohmann::json::parse(in));
    });
    if (cfg.budget_unit == BudgetUnit::scenes) {
      for (std::size_t i = 0; i < graph.size(); ++i) graph.set_cost(i, 1);
    }
    log["load"] = {{"graph", cfg.graph_path.string()}, {"nodes", graph.size()}};
  } else {
    auto prepared = prepare_pack(cfg);
    log = std::move(prepared.log);
    graph = graph_stage(cfg, prepared.pack, log);
  }
  log["parameters"] = parameters(cfg);

  PipelineOutput out;
  if (graph.size() == 0) {
    out.result = evaluate_selection(graph, {});
    out.result.status = ProofStatus::optimal;
    out.result.upper_bound = 0.0;
    out.result.gap = 0.0;
  } else {
    auto t0 = Clock::now();
    DiversityGraph reduced =
        graph.edge_count() == 0 ? graph : in_stage("reduce", [&] { return top_l_pool(graph, cfg.top_l); });
    log["reduce"] = {{"top_l", cfg.top_l}, {"nodes", reduced.size()}, {"time_ms", ms_since(t0)}};

    out.result = in_stage("solve", [&] { return solve({reduced, *cfg.budget, cfg.solver}); });
    const auto lin = check_linearization(reduced, out.result);
    log["solve"] = solver_log(out.result);
    log["solve"]["linearization_violations"] = lin.violations;
    if (lin.violations != 0) {
      throw StageError("solve", ErrorKind::validation, "pair variables violate y_ij = min(x_i, x_j)");
    }
  }
  out.seed = to_json(out.result, "diversity_blp");
  log["total_time_ms"] = ms_since(t_start);
  out.run_log = std::move(log);
  write_outputs(cfg, out);
  return out;
}

PipelineOutput cmd_baseline(const PipelineConfig& cfg, const std::string& baseline) {
  static const std::vector<std::string> known = {"random", "kmcentroid", "kmfurthest", "greedy"};
  if (std::find(known.begin(), known.end(), baseline) == known.end()) {
    throw StageError("config", ErrorKind::usage, "unknown baseline '" + baseline + "'");
  }
  check_config(cfg, true);
  ensure_out_dir(cfg.out_dir);
  const auto t_start = Clock::now();

  auto prepared = prepare_pack(cfg);
  auto log = std::move(prepared.log);
  const auto& pack = prepared.pack;
  const auto graph = graph_stage(cfg, pack, log);
  log["parameters"] = parameters(cfg);
  log["parameters"]["baseline"] = baseline;

  const auto t0 = Clock::now();
  std::vector<std::size_t> picked = in_stage("baseline", [&]() -> std::vector<std::size_t> {
    if (pack.scenes.empty()) return {};
    if (baseline == "random") {
      std::vector<SceneCost> scenes;
      for (const auto& s : pack.scenes) scenes.push_back({s.scene_id, s.cost});
      return select_random(scenes, *cfg.budget, cfg.rng_seed);
    }
    if (baseline == "greedy") return select_greedy_top_pairs(graph, *cfg.budget);
    const auto means = scene_means(pack);
    std::vector<std::uint64_t> costs;
    for (const auto& s : pack.scenes) costs.push_back(s.cost);
    return baseline == "kmcentroid" ? select_kmcentroid(means, costs, *cfg.budget, cfg.k, cfg.rng_seed)
                                    : select_kmfurthest(means, costs, *cfg.budget, cfg.k, cfg.rng_seed);
  });
  if (baseline == "kmcentroid" || baseline == "kmfurthest") {
    log["notes"].push_back(
        "centroid rounds: each cluster adds its next-nearest unselected scene per round; most costly scenes are "
        "trimmed after the final round");
  }
  log["baseline"] = {{"time_ms", ms_since(t0)}};

  PipelineOutput out;
  out.result = evaluate_selection(graph, std::move(picked));
  out.seed = to_json(out.result, baseline);
  log["total_time_ms"] = ms_since(t_start);
  out.run_log = std::move(log);
  write_outputs(cfg, out);
  return out;
}

nlohmann::json cmd_sparsify(const PipelineConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  const auto pack = in_stage("load", [&] { return load_pack(cfg.pack_path); });
  const double threshold = cfg.sparsify_threshold.value_or(kDefaultSparsifyThreshold);
  const auto report = in_stage("sparsify", [&] {
    return sparsify_report(make_frame_pool(pack), SparsifyConfig{threshold});
  });
  auto j = to_json(report);
  j["threshold"] = threshold;
  in_stage("write", [&] {
    write_text(cfg.out_dir / "sparsify_report.json", dump_json(j));
    write_pack(filter_pack(pack, report.retained), cfg.out_dir / "sparsified.sfp");
  });
  return j;
}

nlohmann::json cmd_inspect(const std::filesystem::path& pack_path) {
  const auto pack = in_stage("load", [&] { return load_pack(pack_path); });
  nlohmann::json j;
  j["scenes"] = pack.scenes.size();
  j["dimension"] = pack.scenes.empty() ? 0u : pack.dimension;
  j["header_dimension"] = pack.dimension;
  j["cost_free"] = pack.cost_free();
  std::uint64_t total = 0, lo = 0, hi = 0, views = 0;
  nlohmann::json per_scene = nlohmann::json::array();
  std::vector<std::pair<std::string, std::size_t>> sequences;
  for (std::size_t i = 0; i < pack.scenes.size(); ++i) {
    const auto& s = pack.scenes[i];
    total += s.cost;
    lo = i == 0 ? s.cost : std::min(lo, s.cost);
    hi = std::max(hi, s.cost);
    views += s.view_count();
    per_scene.push_back({{"id", s.scene_id}, {"views", s.view_count()}, {"cost", s.cost}});
    if (s.sequence_id.empty()) continue;
    auto it = std::find_if(sequences.begin(), sequences.end(), [&](const auto& p) { return p.first == s.sequence_id; });
    if (it == sequences.end()) {
      sequences.emplace_back(s.sequence_id, 1);
    } else {
      ++it->second;
    }
  }
  j["views_total"] = views;
  j["cost"] = {{"total", total},
               {"min", lo},
               {"max", hi},
               {"mean", pack.scenes.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(pack.scenes.size())}};
  j["per_scene"] = per_scene;
  nlohmann::json seq = nlohmann::json::array();
  for (const auto& [id, n] : sequences) seq.push_back({{"id", id}, {"frames", n}});
  j["sequences"] = seq;
  return j;
}

namespace {

// Flat "key = value" lines; '#' starts a comment. Keys are long flag names.
std::vector<std::string> config_tokens(const std::filesystem::path& path, const std::vector<std::string>& switches) {
  std::ifstream in(path);
  if (!in) throw StageError("config", std::filesystem::exists(path) ? ErrorKind::io : ErrorKind::not_found,
                            "cannot read config file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw StageError("config", ErrorKind::format, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(switches.begin(), switches.end(), key) != switches.end()) {
      if (value == "true" || value == "1") tokens.push_back("--" + key);
      continue;
    }
    tokens.push_back("--" + key);
    tokens.push_back(value);
  }
  return tokens;
}

void print_error(std::ostream& err, const std::string& stage, std::string_view kind, const std::string& message) {
  err << nlohmann::json{{"stage", stage}, {"kind", kind}, {"message", message}}.dump() << "\n";
}

void write_error_file(const std::filesystem::path& dir, const std::string& stage, std::string_view kind,
                      const std::string& message) {
  std::error_code ec;
  if (dir.empty() || !std::filesystem::is_directory(dir, ec)) return;
  std::ofstream out(dir / "error.json");
  out << dump_json({{"stage", stage}, {"kind", kind}, {"message", message}});
}

int exit_code_for(const std::string& stage, ErrorKind kind) {
  if (stage == "load" || kind == ErrorKind::usage || kind == ErrorKind::not_found) return 2;
  return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> switches = {"emit-graph", "no-sparsify"};

  PipelineConfig cfg;
  std::vector<std::string> args = raw_args;
  try {
    // Config-file values are spliced in right after the subcommand so that
    // explicit flags, parsed later, take precedence.
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
      if (args[i] != "--config") continue;
      const std::filesystem::path cfg_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      auto tokens = config_tokens(cfg_path, switches);
      std::size_t at = 2;
      if (args.size() < 2) at = args.size();
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), tokens.begin(), tokens.end());
      break;
    }
  } catch (const StageError& e) {
    print_error(err, e.stage(), kind_name(e.kind()), e.what());
    return 2;
  }

  CLI::App app{"Budgeted diversity seed selection for active learning"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  std::string budget_unit = "points";
  std::string mode = "exact";
  std::uint64_t budget = 0;
  double threshold = kDefaultSparsifyThreshold;
  std::string baseline;
  std::string pack;
  std::string graph_path;
  std::string out_dir = ".";
  std::string config_unused;

  auto add_common = [&](CLI::App* sub, bool selection) {
    sub->add_option("--pack", pack, "Feature pack (.sfp or JSON manifest)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--config", config_unused, "Flat key = value config file; flags win");
    if (!selection) return;
    sub->add_option("--budget", budget, "Annotation budget (points, or scenes with --budget-unit scenes)")->required();
    sub->add_option("--budget-unit", budget_unit)->check(CLI::IsMember({"points", "scenes"}));
    sub->add_option("--k", cfg.k, "Clusters per scene (use the task's class count)");
    sub->add_option("--top-l", cfg.top_l, "Keep scenes on the L heaviest edges")->capture_default_str();
    sub->add_option("--sparsify-threshold", threshold, "Cosine threshold for sequence thinning");
    sub->add_flag("--no-sparsify", cfg.no_sparsify, "Disable automatic sparsification of sequence packs");
    sub->add_option("--seed", cfg.rng_seed, "RNG seed")->capture_default_str();
    sub->add_option("--kmeans-iterations", cfg.kmeans_iterations)->capture_default_str();
    sub->add_option("--threads", cfg.threads, "Worker threads (0 = auto)")->capture_default_str();
    sub->add_flag("--emit-graph", cfg.emit_graph, "Also write graph.json");
  };

  auto* inspect = app.add_subcommand("inspect", "Summarize a feature pack");
  add_common(inspect, false);
  inspect->add_option("pack_path", pack, "Feature pack");

  auto* sparsify = app.add_subcommand("sparsify", "Thin near-duplicate frames within sequences");
  add_common(sparsify, false);
  sparsify->add_option("--sparsify-threshold", threshold, "Cosine threshold")->capture_default_str();

  auto* select = app.add_subcommand("select", "Diversity-optimal seed selection");
  add_common(select, true);
  select->add_option("--graph", graph_path, "Solve a graph.json dump instead of a pack");
  select->add_option("--mode", mode)->check(CLI::IsMember({"exact", "anytime"}))->capture_default_str();
  select->add_option("--time-limit", cfg.solver.time_limit_seconds, "Anytime limit in seconds, applied as a node budget")
      ->capture_default_str();
  select->add_option("--node-limit", cfg.solver.node_limit, "Explicit node budget (overrides --time-limit)");
  select->add_option("--gap", cfg.solver.gap_tolerance, "Anytime relative gap target")->capture_default_str();

  auto* base = app.add_subcommand("baseline", "Run a seeding baseline");
  add_common(base, true);
  base->add_option("--method", baseline, "random | kmcentroid | kmfurthest | greedy")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    print_error(err, "cli", "usage", e.what());
    return 2;
  }

  cfg.pack_path = pack;
  cfg.graph_path = graph_path;
  cfg.out_dir = out_dir;
  try {
    if (inspect->parsed()) {
      if (pack.empty()) throw StageError("config", ErrorKind::usage, "inspect needs a pack path");
      out << dump_json(cmd_inspect(cfg.pack_path));
      return 0;
    }
    if (sparsify->parsed()) {
      if (pack.empty()) throw StageError("config", ErrorKind::usage, "--pack is required");
      cfg.sparsify_threshold = threshold;
      const auto j = cmd_sparsify(cfg);
      out << "retained " << j["retained"].size() << ", dropped " << j["dropped"].size() << "\n";
      return 0;
    }
    auto* sub = select->parsed() ? select : base;
    if (pack.empty() && graph_path.empty()) throw StageError("config", ErrorKind::usage, "--pack is required");
    cfg.budget = budget;
    cfg.budget_unit = budget_unit == "scenes" ? BudgetUnit::scenes : BudgetUnit::points;
    if (sub->count("--sparsify-threshold") > 0) cfg.sparsify_threshold = threshold;
    cfg.solver.mode = mode == "anytime" ? SolveMode::anytime : SolveMode::exact;
    const auto result = select->parsed() ? cmd_select(cfg) : cmd_baseline(cfg, baseline);
    out << "selected " << result.result.selected.size() << " scenes, objective " << result.result.objective
        << ", cost " << result.result.total_cost << ", " << status_name(result.result.status) << "\n";
    return 0;
  } catch (const StageError& e) {
    print_error(err, e.stage(), kind_name(e.kind()), e.what());
    write_error_file(cfg.out_dir, e.stage(), kind_name(e.kind()), e.what());
    return exit_code_for(e.stage(), e.kind());
  } catch (const Error& e) {
    print_error(err, "unknown", kind_name(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error(err, "unknown", "io", e.what());
    return 1;
  }
}

}  // namespace seedpick
