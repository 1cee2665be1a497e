#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seedpick/error.hpp"
#include "seedpick/selector.hpp"

namespace seedpick {

enum class BudgetUnit { points, scenes };

struct PipelineConfig {
  std::filesystem::path pack_path;
  std::filesystem::path graph_path;  // select only: solve a graph dump instead of a pack
  std::size_t k = 0;                 // required for anything that clusters
  std::int64_t top_l = 100;
  std::optional<std::uint64_t> budget;
  BudgetUnit budget_unit = BudgetUnit::points;
  std::optional<double> sparsify_threshold;  // unset: 0.75 on sequence packs, off otherwise
  bool no_sparsify = false;
  SolveOptions solver{SolveMode::exact, 60.0, 0.0, 0};
  std::uint64_t rng_seed = 0;
  std::size_t kmeans_iterations = 100;
  std::filesystem::path out_dir = ".";
  std::size_t threads = 0;
  bool emit_graph = false;
};

inline constexpr double kDefaultSparsifyThreshold = 0.75;

/// An Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& message)
      : Error(kind, message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PipelineOutput {
  nlohmann::json seed;     // written to seed.json
  nlohmann::json run_log;  // written to run_log.json
  SelectionResult result;
};

/// sparsify -> build graph -> top-L -> solve. Writes seed.json, run_log.json
/// and (with emit_graph) graph.json into cfg.out_dir.
PipelineOutput cmd_select(const PipelineConfig& cfg);

/// Same artifacts, with one of: random, kmcentroid, kmfurthest, greedy.
PipelineOutput cmd_baseline(const PipelineConfig& cfg, const std::string& baseline);

/// Writes sparsify_report.json and sparsified.sfp into cfg.out_dir.
nlohmann::json cmd_sparsify(const PipelineConfig& cfg);

nlohmann::json cmd_inspect(const std::filesystem::path& pack_path);

/// Full command-line entry point. Exit codes: 0 ok, 1 bad solver or run
/// configuration, 2 input or usage error. Failures print one line of error
/// JSON {"stage","kind","message"} to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string dump_json(const nlohmann::json& j);

}  // namespace seedpick
