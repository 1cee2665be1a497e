#include "seedpick/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "seedpick/error.hpp"

namespace seedpick {

std::string_view status_name(ProofStatus status) {
  switch (status) {
    case ProofStatus::optimal: return "optimal";
    case ProofStatus::feasible: return "feasible";
    case ProofStatus::heuristic: return "heuristic";
  }
  return "unknown";
}

std::uint64_t SolveOptions::effective_node_limit() const {
  if (node_limit != 0) return node_limit;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(time_limit_seconds * kNodesPerSecond)));
}

double selection_objective(const DiversityGraph& graph, std::span<const std::size_t> selected) {
  double sum = 0.0;
  for (std::size_t a = 0; a < selected.size(); ++a) {
    for (std::size_t b = a + 1; b < selected.size(); ++b) sum += graph.weight(selected[a], selected[b]);
  }
  return sum;
}

std::uint64_t selection_cost(const DiversityGraph& graph, std::span<const std::size_t> selected) {
  std::uint64_t c = 0;
  for (std::size_t i : selected) c += graph.node(i).cost;
  return c;
}

namespace {

std::vector<std::string> sorted_ids(const DiversityGraph& graph, std::span<const std::size_t> set) {
  std::vector<std::string> ids;
  ids.reserve(set.size());
  for (std::size_t i : set) ids.push_back(graph.node(i).scene_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

struct Candidate {
  std::vector<std::size_t> set;  // graph indices, ascending
  double objective = 0.0;
  std::uint64_t cost = 0;
};

Candidate make_candidate(const DiversityGraph& graph, std::vector<std::size_t> set) {
  std::sort(set.begin(), set.end());
  Candidate c;
  c.objective = selection_objective(graph, set);
  c.cost = selection_cost(graph, set);
  c.set = std::move(set);
  return c;
}

// Objective, then cost, then ids.
bool better(const DiversityGraph& graph, const Candidate& a, const Candidate& b) {
  if (a.objective != b.objective) return a.objective > b.objective;
  if (a.cost != b.cost) return a.cost < b.cost;
  return sorted_ids(graph, a.set) < sorted_ids(graph, b.set);
}

void fill_ids(const DiversityGraph& graph, SelectionResult& r) {
  r.selected_ids.clear();
  for (std::size_t i : r.selected) r.selected_ids.push_back(graph.node(i).scene_id);
}

double relative_gap(double ub, double obj) { return (ub - obj) / std::max(obj, kGapEpsilon); }

// Adds affordable scenes by largest marginal gain (ties: smallest id) until
// nothing fits.
void complete_to_maximal(const DiversityGraph& graph, std::uint64_t budget, std::vector<std::size_t>& set) {
  const std::size_t n = graph.size();
  std::vector<bool> in(n, false);
  std::uint64_t used = 0;
  for (std::size_t i : set) {
    in[i] = true;
    used += graph.node(i).cost;
  }
  std::vector<double> gain(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    if (in[a]) continue;
    for (std::size_t s : set) gain[a] += graph.weight(a, s);
  }
  while (true) {
    std::size_t pick = n;
    for (std::size_t a = 0; a < n; ++a) {
      if (in[a] || graph.node(a).cost > budget - used) continue;
      if (pick == n || gain[a] > gain[pick] ||
          (gain[a] == gain[pick] && graph.node(a).scene_id < graph.node(pick).scene_id)) {
        pick = a;
      }
    }
    if (pick == n) break;
    in[pick] = true;
    used += graph.node(pick).cost;
    set.push_back(pick);
    for (std::size_t a = 0; a < n; ++a) {
      if (!in[a]) gain[a] += graph.weight(a, pick);
    }
  }
  std::sort(set.begin(), set.end());
}

class BranchAndBound {
 public:
  BranchAndBound(const DiversityGraph& graph, std::uint64_t budget, const SolveOptions& options)
      : graph_(graph), budget_(budget), options_(options) {}

  SelectionResult run();

 private:
  struct SetNode {
    std::int32_t parent;
    std::uint32_t var;
  };
  struct SearchNode {
    double bound;
    std::uint64_t serial;
    std::int32_t set;
    std::uint32_t depth;
  };
  struct SearchOrder {
    bool operator()(const SearchNode& a, const SearchNode& b) const {
      if (a.bound != b.bound) return a.bound < b.bound;
      return a.serial > b.serial;
    }
  };
  // Included variables with derived quantities.
  struct State {
    std::vector<std::uint32_t> vars;
    std::vector<double> contrib;  // sum of weights to included vars, per local var
    double objective = 0.0;
    std::uint64_t remaining = 0;
  };

  void prepare();
  double w(std::size_t a, std::size_t b) const { return weights_[a * m_ + b]; }
  double slack() const { return 1e-10 * std::max(best_.objective, 0.0) + 1e-15; }

  void include(State& st, std::uint32_t v) const;
  double bound(const State& st, std::uint32_t depth);
  void dive(State st, std::uint32_t depth);
  void local_search(State st);
  void offer_local(const State& st);
  void offer(std::vector<std::size_t> graph_set);

  const DiversityGraph& graph_;
  std::uint64_t budget_;
  SolveOptions options_;

  std::size_t m_ = 0;
  std::vector<std::size_t> orig_;  // local -> graph index
  std::vector<std::uint64_t> cost_;
  std::vector<double> weights_;                   // m x m
  std::vector<std::vector<std::uint32_t>> by_ratio_;  // positive neighbors by w/c, descending

  Candidate best_;
  SolverStats stats_;
  std::vector<double> trace_;

  // Scratch reused across bound evaluations.
  std::vector<char> free_;
  std::vector<std::uint32_t> items_;
  std::vector<double> profit_;
};

bool ratio_greater(double wa, std::uint64_t ca, double wb, std::uint64_t cb) {
  // wa/ca > wb/cb with zero cost as +infinity.
  if (ca == 0 || cb == 0) {
    if (ca == 0 && cb == 0) return wa > wb;
    return ca == 0;
  }
  return wa * static_cast<double>(cb) > wb * static_cast<double>(ca);
}

void BranchAndBound::prepare() {
  const std::size_t n = graph_.size();
  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ci = graph_.node(i).cost;
    if (ci > budget_) continue;
    bool useful = false;
    for (std::size_t j = 0; j < n && !useful; ++j) {
      if (j == i) continue;
      const auto cj = graph_.node(j).cost;
      useful = cj <= budget_ - ci && graph_.weight(i, j) > 0.0;
    }
    if (useful) work.push_back(i);
  }

  std::vector<double> density(n, 0.0);
  for (std::size_t i : work) {
    double s = 0.0;
    for (std::size_t j : work) {
      if (j != i) s += graph_.weight(i, j);
    }
    const auto c = graph_.node(i).cost;
    density[i] = c == 0 ? std::numeric_limits<double>::infinity() : graph_.node(i).intra_diversity * s / static_cast<double>(c);
  }
  std::sort(work.begin(), work.end(), [&](std::size_t a, std::size_t b) {
    if (density[a] != density[b]) return density[a] > density[b];
    return graph_.node(a).scene_id < graph_.node(b).scene_id;
  });

  m_ = work.size();
  orig_ = work;
  cost_.resize(m_);
  weights_.assign(m_ * m_, 0.0);
  for (std::size_t a = 0; a < m_; ++a) {
    cost_[a] = graph_.node(orig_[a]).cost;
    for (std::size_t b = 0; b < m_; ++b) {
      if (a != b) weights_[a * m_ + b] = graph_.weight(orig_[a], orig_[b]);
    }
  }
  by_ratio_.assign(m_, {});
  for (std::size_t a = 0; a < m_; ++a) {
    auto& list = by_ratio_[a];
    for (std::uint32_t b = 0; b < m_; ++b) {
      if (b != a && w(a, b) > 0.0) list.push_back(b);
    }
    std::sort(list.begin(), list.end(), [&](std::uint32_t x, std::uint32_t y) {
      if (ratio_greater(w(a, x), cost_[x], w(a, y), cost_[y])) return true;
      if (ratio_greater(w(a, y), cost_[y], w(a, x), cost_[x])) return false;
      return x < y;
    });
  }
  free_.assign(m_, 0);
  profit_.assign(m_, 0.0);
  stats_.search_size = m_;
}

void BranchAndBound::include(State& st, std::uint32_t v) const {
  st.objective += st.contrib[v];
  st.remaining -= cost_[v];
  st.vars.push_back(v);
  for (std::size_t a = 0; a < m_; ++a) st.contrib[a] += w(a, v);
}

double BranchAndBound::bound(const State& st, std::uint32_t depth) {
  items_.clear();
  for (std::uint32_t a = 0; a < m_; ++a) {
    free_[a] = a >= depth && cost_[a] <= st.remaining;
    if (free_[a]) items_.push_back(a);
  }
  for (std::uint32_t a : items_) {
    // Best fractional partner mass for a among the other free variables.
    std::uint64_t cap = st.remaining - cost_[a];
    double partners = 0.0;
    for (std::uint32_t b : by_ratio_[a]) {
      if (!free_[b]) continue;
      if (cost_[b] <= cap) {
        partners += w(a, b);
        cap -= cost_[b];
      } else {
        if (cap > 0) partners += w(a, b) * static_cast<double>(cap) / static_cast<double>(cost_[b]);
        break;
      }
    }
    profit_[a] = st.contrib[a] + 0.5 * partners;
  }
  std::sort(items_.begin(), items_.end(), [&](std::uint32_t x, std::uint32_t y) {
    if (ratio_greater(profit_[x], cost_[x], profit_[y], cost_[y])) return true;
    if (ratio_greater(profit_[y], cost_[y], profit_[x], cost_[x])) return false;
    return x < y;
  });
  double total = st.objective;
  std::uint64_t cap = st.remaining;
  for (std::uint32_t a : items_) {
    if (cost_[a] <= cap) {
      total += profit_[a];
      cap -= cost_[a];
    } else {
      if (cap > 0) total += profit_[a] * static_cast<double>(cap) / static_cast<double>(cost_[a]);
      break;
    }
  }
  return total;
}

void BranchAndBound::offer(std::vector<std::size_t> graph_set) {
  Candidate c = make_candidate(graph_, std::move(graph_set));
  if (c.cost > budget_) return;
  if (better(graph_, c, best_)) {
    const bool improved = c.objective > best_.objective;
    best_ = std::move(c);
    ++stats_.incumbent_updates;
    if (improved || trace_.empty()) trace_.push_back(best_.objective);
  }
}

void BranchAndBound::offer_local(const State& st) {
  if (st.objective < best_.objective - slack()) return;
  std::vector<std::size_t> set;
  set.reserve(st.vars.size());
  for (auto v : st.vars) set.push_back(orig_[v]);
  offer(std::move(set));
}

// Greedy completion by marginal gain per cost over free variables >= depth.
void BranchAndBound::dive(State st, std::uint32_t depth) {
  std::vector<char> taken(m_, 0);
  for (auto v : st.vars) taken[v] = 1;
  while (true) {
    std::uint32_t pick = static_cast<std::uint32_t>(m_);
    for (std::uint32_t a = depth; a < m_; ++a) {
      if (taken[a] || cost_[a] > st.remaining || st.contrib[a] <= 0.0) continue;
      if (pick == m_ || ratio_greater(st.contrib[a], cost_[a], st.contrib[pick], cost_[pick])) pick = a;
    }
    if (pick == m_) break;
    taken[pick] = 1;
    include(st, pick);
  }
  const double before = best_.objective;
  offer_local(st);
  if (best_.objective > before) local_search(std::move(st));
}

// Add and swap moves over all variables until no move improves.
void BranchAndBound::local_search(State st) {
  std::vector<char> in(m_, 0);
  for (auto v : st.vars) in[v] = 1;
  for (std::size_t iter = 0; iter < 4 * m_ + 16; ++iter) {
    const double tol = 1e-12 * (1.0 + st.objective);
    std::uint32_t add = static_cast<std::uint32_t>(m_);
    for (std::uint32_t a = 0; a < m_; ++a) {
      if (in[a] || cost_[a] > st.remaining || st.contrib[a] <= tol) continue;
      if (add == m_ || st.contrib[a] > st.contrib[add]) add = a;
    }
    if (add != m_) {
      in[add] = 1;
      include(st, add);
      continue;
    }
    double best_delta = tol;
    std::size_t out_pos = 0;
    std::uint32_t in_var = static_cast<std::uint32_t>(m_);
    for (std::size_t p = 0; p < st.vars.size(); ++p) {
      const auto s = st.vars[p];
      const std::uint64_t room = st.remaining + cost_[s];
      for (std::uint32_t a = 0; a < m_; ++a) {
        if (in[a] || cost_[a] > room) continue;
        const double delta = st.contrib[a] - w(a, s) - st.contrib[s];
        if (delta > best_delta) {
          best_delta = delta;
          out_pos = p;
          in_var = a;
        }
      }
    }
    if (in_var == m_) break;
    const auto s = st.vars[out_pos];
    st.vars.erase(st.vars.begin() + static_cast<std::ptrdiff_t>(out_pos));
    in[s] = 0;
    st.objective -= st.contrib[s];
    st.remaining += cost_[s];
    for (std::size_t a = 0; a < m_; ++a) st.contrib[a] -= w(a, s);
    in[in_var] = 1;
    include(st, in_var);
  }
  // Recompute exactly before offering; the running sums drift.
  std::vector<std::size_t> set;
  for (auto v : st.vars) set.push_back(orig_[v]);
  offer(std::move(set));
}

SelectionResult BranchAndBound::run() {
  const auto t0 = std::chrono::steady_clock::now();
  prepare();

  best_ = make_candidate(graph_, {});
  trace_.push_back(0.0);
  offer(select_greedy_top_pairs(graph_, budget_));

  State root;
  root.contrib.assign(m_, 0.0);
  root.remaining = budget_;
  dive(root, 0);
  local_search(root);

  const bool anytime = options_.mode == SolveMode::anytime;
  const std::uint64_t node_limit = anytime ? options_.effective_node_limit() : std::numeric_limits<std::uint64_t>::max();

  std::vector<SetNode> sets;
  std::priority_queue<SearchNode, std::vector<SearchNode>, SearchOrder> open;
  std::uint64_t serial = 0;
  stats_.root_bound = m_ == 0 ? 0.0 : bound(root, 0);
  double upper = std::max(stats_.root_bound, best_.objective);
  if (m_ > 0) open.push({stats_.root_bound, serial++, -1, 0});

  auto rebuild = [&](std::int32_t set) {
    State st;
    st.contrib.assign(m_, 0.0);
    st.remaining = budget_;
    std::vector<std::uint32_t> vars;
    for (std::int32_t s = set; s >= 0; s = sets[static_cast<std::size_t>(s)].parent) {
      vars.push_back(sets[static_cast<std::size_t>(s)].var);
    }
    std::reverse(vars.begin(), vars.end());
    for (auto v : vars) include(st, v);
    return st;
  };

  bool finished = false;
  while (true) {
    while (!open.empty() && open.top().bound < best_.objective - slack()) {
      open.pop();
      ++stats_.prunes;
    }
    if (open.empty()) {
      finished = true;
      break;
    }
    upper = std::min(upper, std::max(best_.objective, open.top().bound));
    if (anytime) {
      if (relative_gap(upper, best_.objective) <= options_.gap_tolerance) break;
      if (stats_.nodes >= node_limit) break;
    }
    const SearchNode node = open.top();
    open.pop();
    ++stats_.nodes;

    State st = rebuild(node.set);
    std::uint32_t v = node.depth;
    while (v < m_ && cost_[v] > st.remaining) ++v;
    if (v >= m_) continue;

    // Exclude branch first in memory, include branch carries the new set.
    const double excl_bound = bound(st, v + 1);
    State with = st;
    include(with, v);
    offer_local(with);
    dive(with, v + 1);
    const double incl_bound = bound(with, v + 1);

    if (incl_bound >= best_.objective - slack()) {
      sets.push_back({node.set, v});
      open.push({incl_bound, serial++, static_cast<std::int32_t>(sets.size() - 1), v + 1});
    } else {
      ++stats_.prunes;
    }
    if (excl_bound >= best_.objective - slack()) {
      open.push({excl_bound, serial++, node.set, v + 1});
    } else {
      ++stats_.prunes;
    }
  }

  SelectionResult result;
  std::vector<std::size_t> chosen = best_.set;
  complete_to_maximal(graph_, budget_, chosen);
  result.selected = std::move(chosen);
  result.objective = selection_objective(graph_, result.selected);
  result.total_cost = selection_cost(graph_, result.selected);
  if (result.objective > trace_.back()) trace_.push_back(result.objective);
  // A closed gap is as good as an exhausted tree.
  if (finished || upper <= result.objective) {
    result.status = ProofStatus::optimal;
    result.upper_bound = result.objective;
  } else {
    result.status = ProofStatus::feasible;
    result.upper_bound = std::max(upper, result.objective);
  }
  result.gap = relative_gap(result.upper_bound, result.objective);
  result.incumbent_trace = std::move(trace_);
  stats_.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  result.stats = stats_;
  fill_ids(graph_, result);
  return result;
}

}  // namespace

SelectionResult evaluate_selection(const DiversityGraph& graph, std::vector<std::size_t> selected) {
  std::sort(selected.begin(), selected.end());
  SelectionResult r;
  r.objective = selection_objective(graph, selected);
  r.total_cost = selection_cost(graph, selected);
  r.selected = std::move(selected);
  r.status = ProofStatus::heuristic;
  r.upper_bound = std::numeric_limits<double>::quiet_NaN();
  r.gap = std::numeric_limits<double>::quiet_NaN();
  fill_ids(graph, r);
  return r;
}

LinearizationCheck check_linearization(const DiversityGraph& graph, const SelectionResult& result) {
  const std::size_t n = graph.size();
  std::vector<int> x(n, 0);
  for (std::size_t i : result.selected) x[i] = 1;
  LinearizationCheck check;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // y_ij can only be raised to 1 when both endpoints are selected; with
      // e_ij >= 0 the maximizing choice is y_ij = x_i x_j.
      const int y = (x[i] == 1 && x[j] == 1) ? 1 : 0;
      ++check.pairs;
      if (y > x[i] || y > x[j] || y != std::min(x[i], x[j])) ++check.violations;
      if (y == 1) check.objective += graph.weight(i, j);
    }
  }
  return check;
}

SelectionResult brute_force_select(const SelectionProblem& problem) {
  const auto& graph = problem.graph;
  const std::size_t n = graph.size();
  if (n > kBruteForceMaxNodes) {
    throw Error(ErrorKind::refusal, "brute force refuses " + std::to_string(n) + " scenes (limit " +
                                        std::to_string(kBruteForceMaxNodes) + ")");
  }
  Candidate best = make_candidate(graph, {});
  std::vector<std::size_t> set;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::uint64_t cost = 0;
    set.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        cost += graph.node(i).cost;
        set.push_back(i);
      }
    }
    if (cost > problem.budget) continue;
    const double obj = selection_objective(graph, set);
    if (obj < best.objective) continue;
    Candidate c{set, obj, cost};
    if (better(graph, c, best)) best = std::move(c);
  }
  SelectionResult r;
  r.selected = best.set;
  r.objective = best.objective;
  r.total_cost = best.cost;
  r.upper_bound = best.objective;
  r.gap = 0.0;
  r.status = ProofStatus::optimal;
  r.incumbent_trace = {best.objective};
  fill_ids(graph, r);
  return r;
}

SelectionResult solve(const SelectionProblem& problem) {
  if (problem.graph.size() == 0) throw Error(ErrorKind::validation, "solve on an empty graph");
  const auto& opt = problem.options;
  if (opt.mode == SolveMode::anytime) {
    if (!(opt.time_limit_seconds > 0.0) && opt.node_limit == 0) {
      throw Error(ErrorKind::validation, "anytime mode needs a positive time limit");
    }
    if (!(opt.gap_tolerance >= 0.0)) throw Error(ErrorKind::validation, "gap tolerance must be nonnegative");
  }
  BranchAndBound bnb(problem.graph, problem.budget, opt);
  return bnb.run();
}

std::vector<std::size_t> select_greedy_top_pairs(const DiversityGraph& graph, std::uint64_t budget) {
  const std::size_t n = graph.size();
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (graph.weight(i, j) > 0.0) edges.emplace_back(i, j);
    }
  }
  auto ordered_ids = [&](const std::pair<std::size_t, std::size_t>& e) {
    const auto& a = graph.node(e.first).scene_id;
    const auto& b = graph.node(e.second).scene_id;
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  std::stable_sort(edges.begin(), edges.end(), [&](const auto& x, const auto& y) {
    const double wx = graph.weight(x.first, x.second);
    const double wy = graph.weight(y.first, y.second);
    if (wx != wy) return wx > wy;
    return ordered_ids(x) < ordered_ids(y);
  });
  std::vector<bool> in(n, false);
  std::vector<std::size_t> selected;
  std::uint64_t used = 0;
  for (const auto& [i, j] : edges) {
    for (std::size_t v : {i, j}) {
      if (in[v] || graph.node(v).cost > budget - used) continue;
      in[v] = true;
      used += graph.node(v).cost;
      selected.push_back(v);
    }
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

nlohmann::json to_json(const SelectionResult& result, std::string_view method) {
  nlohmann::json j;
  j["method"] = method;
  j["selected"] = result.selected_ids;
  j["objective"] = result.objective;
  j["total_cost"] = result.total_cost;
  if (result.status == ProofStatus::heuristic) {
    j["upper_bound"] = nullptr;
    j["gap"] = nullptr;
  } else {
    j["upper_bound"] = result.upper_bound;
    j["gap"] = result.gap;
  }
  j["proof_status"] = status_name(result.status);
  j["solver_stats"] = {{"nodes", result.stats.nodes}, {"prunes", result.stats.prunes}};
  return j;
}

}  // namespace seedpick
