#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "seedpick/diversity.hpp"

namespace seedpick {

enum class SolveMode { exact, anytime };
enum class ProofStatus { optimal, feasible, heuristic };

std::string_view status_name(ProofStatus status);

/// Wall-clock limits are converted to node-expansion budgets at this rate so
/// anytime results do not depend on machine speed.
inline constexpr double kNodesPerSecond = 2000.0;

/// Report denominator floor for the relative gap.
inline constexpr double kGapEpsilon = 1e-12;

struct SolveOptions {
  SolveMode mode = SolveMode::exact;
  double time_limit_seconds = 60.0;  // anytime only
  double gap_tolerance = 0.0;        // anytime only; stop once gap <= this
  std::uint64_t node_limit = 0;      // anytime only; 0 = derived from time limit

  std::uint64_t effective_node_limit() const;
};

struct SelectionProblem {
  const DiversityGraph& graph;
  std::uint64_t budget = 0;
  SolveOptions options{};
};

struct SolverStats {
  std::uint64_t nodes = 0;   // expanded search nodes
  std::uint64_t prunes = 0;  // nodes discarded by bound
  std::uint64_t incumbent_updates = 0;
  std::size_t search_size = 0;  // scenes left after preprocessing
  double root_bound = 0.0;
  double time_ms = 0.0;
};

struct SelectionResult {
  std::vector<std::size_t> selected;  // node indices, ascending
  std::vector<std::string> selected_ids;
  double objective = 0.0;
  std::uint64_t total_cost = 0;
  double upper_bound = 0.0;
  double gap = 0.0;
  ProofStatus status = ProofStatus::heuristic;
  SolverStats stats;
  std::vector<double> incumbent_trace;  // incumbent objective after each improvement
};

/// Sum of e_ij over selected pairs, accumulated with i ascending then j
/// ascending. Every component reports objectives through this function so
/// that equal selections give bit-equal values.
double selection_objective(const DiversityGraph& graph, std::span<const std::size_t> selected);
std::uint64_t selection_cost(const DiversityGraph& graph, std::span<const std::size_t> selected);

/// Packs an arbitrary selection into a result with heuristic status.
SelectionResult evaluate_selection(const DiversityGraph& graph, std::vector<std::size_t> selected);

struct LinearizationCheck {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double objective = 0.0;  // sum of e_ij y_ij
};

/// Builds the pair variables y_ij of the linear form from result.selected
/// and checks y_ij <= x_i, y_ij <= x_j and y_ij = min(x_i, x_j) on every pair.
LinearizationCheck check_linearization(const DiversityGraph& graph, const SelectionResult& result);

inline constexpr std::size_t kBruteForceMaxNodes = 25;

/// Exhaustive 2^M enumeration. Ties go to the smaller total cost, then the
/// lexicographically smaller sorted id list. Refuses M > 25.
SelectionResult brute_force_select(const SelectionProblem& problem);

/// Branch and bound over scene variables.
///
/// Exact mode runs to a proof of optimality. Anytime mode stops at the node
/// budget or when the relative gap falls to the tolerance, and reports the
/// incumbent with its certified bound. The returned set is completed to be
/// maximal under the budget (zero-gain scenes added by lowest id).
SelectionResult solve(const SelectionProblem& problem);

/// Edges by descending weight (ties by endpoint ids); both endpoints of each
/// positive edge are added when affordable. Returns ascending indices.
std::vector<std::size_t> select_greedy_top_pairs(const DiversityGraph& graph, std::uint64_t budget);

nlohmann::json to_json(const SelectionResult& result, std::string_view method);

}  // namespace seedpick
