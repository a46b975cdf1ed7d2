#include "hh/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "detail.hpp"

namespace hh {

namespace detail {

void MomentAccumulator::add(double x) {
  if (count_ == 0) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  ++count_;
  sum_ += x;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  sum_sq_dev_ += delta * (x - mean_);
}

Moments MomentAccumulator::result() const {
  Moments m;
  m.count = count_;
  if (count_ == 0) return m;
  m.mean = sum_ / static_cast<double>(count_);
  m.variance = std::max(0.0, sum_sq_dev_ / static_cast<double>(count_));
  m.min = min_;
  m.max = max_;
  return m;
}

std::size_t op_grid_size(const ProblemState& state, OpKind kind) {
  const auto& inst = state.inst();
  const std::size_t n = static_cast<std::size_t>(inst.size());
  switch (kind) {
    case OpKind::Append: return n;
    case OpKind::Insert: return n * (state.tsp().tour.size() + 1);
    case OpKind::Swap:
    case OpKind::ReverseSegment: {
      const std::size_t len = state.tsp().tour.size();
      return len * len;
    }
    case OpKind::Relocate: {
      const std::size_t len = state.tsp().tour.size();
      return len * len * len;
    }
    case OpKind::Add:
    case OpKind::Remove:
    case OpKind::Toggle:
    case OpKind::RemoveNode:
      return n;
    case OpKind::SwapItem:
    case OpKind::FlipBlock:
    case OpKind::SwapNode:
      return n * n;
    case OpKind::AssignNode:
      return 2 * n;
  }
  return 0;
}

OperationRecord op_from_grid(const ProblemState& state, OpKind kind,
                             std::size_t index) {
  const std::size_t n = static_cast<std::size_t>(state.inst().size());
  OperationRecord op{kind, {}};
  auto set = [&op](std::size_t a, std::size_t b = 0, std::size_t c = 0) {
    op.args = {static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)};
  };
  switch (kind) {
    case OpKind::Append:
    case OpKind::Add:
    case OpKind::Remove:
    case OpKind::Toggle:
    case OpKind::RemoveNode:
      set(index);
      break;
    case OpKind::Insert: {
      const std::size_t slots = state.tsp().tour.size() + 1;
      set(index / slots, index % slots);
      break;
    }
    case OpKind::Swap:
    case OpKind::ReverseSegment: {
      const std::size_t len = state.tsp().tour.size();
      set(index / len, index % len);
      break;
    }
    case OpKind::Relocate: {
      const std::size_t len = state.tsp().tour.size();
      set(index / (len * len), (index / len) % len + 1, index % len);
      break;
    }
    case OpKind::SwapItem:
    case OpKind::SwapNode:
      set(index / n, index % n);
      break;
    case OpKind::FlipBlock:
      set(index / n, index % n + 1);
      break;
    case OpKind::AssignNode:
      set(index / 2, index % 2);
      break;
  }
  return op;
}

}  // namespace detail

const std::vector<FeatureSpec>& feature_schema(ProblemKind kind) {
  static const std::vector<FeatureSpec> tsp = {
      {"average_distance", true},      {"min_distance", true},
      {"max_distance", true},          {"std_dev_distance", true},
      {"node_num", true},              {"current_path_length", false},
      {"remaining_nodes", false},      {"current_cost", false},
      {"average_edge_cost", false},    {"last_edge_cost", false},
      {"std_dev_edge_cost", false},    {"solution_validity", false},
      {"min_edge_cost_remaining", false},
      {"max_edge_cost_remaining", false},
  };
  static const std::vector<FeatureSpec> mkp = {
      {"average_profit", true},
      {"profit_variance", true},
      {"average_weight_per_resource", true},
      {"weight_variance_per_resource", true},
      {"total_weights", true},
      {"capacity_to_weight_ratio", true},
      {"weights_with_epsilon", true},
      {"profit_to_weight_ratio", true},
      {"solution_density", false},
      {"average_remaining_capacity", false},
      {"remaining_capacity_variance", false},
      {"total_remaining_items", false},
      {"feasibility_ratio", false},
      {"utilized_capacity_ratio", false},
      {"included_items", false},
      {"included_profits", false},
      {"item_profitability_in_solution", false},
  };
  static const std::vector<FeatureSpec> maxcut = {
      {"average_node_degree", true},
      {"edge_density", true},
      {"average_edge_weight", true},
      {"max_edge_weight", true},
      {"min_edge_weight", true},
      {"standard_deviation_edge_weight", true},
      {"weighted_degree_distribution", true},
      {"imbalance_ratio", false},
      {"cut_value", false},
      {"average_cut_edge_weight", false},
      {"selected_nodes_ratio", false},
      {"unselected_nodes_ratio", false},
      {"internal_edges", false},
      {"edge_weight_variance_within_sets", false},
      {"boundary_nodes", false},
      {"boundary_node_ratio", false},
  };
  switch (kind) {
    case ProblemKind::Tsp: return tsp;
    case ProblemKind::Mkp: return mkp;
    case ProblemKind::MaxCut: return maxcut;
  }
  return tsp;
}

ProblemState initial_state(InstancePtr instance) {
  ProblemState state;
  const auto& inst = *instance;
  switch (inst.kind) {
    case ProblemKind::Tsp: {
      TspSolution sol;
      sol.visited.assign(inst.tsp().n, 0);
      state.solution = std::move(sol);
      break;
    }
    case ProblemKind::Mkp: {
      MkpSolution sol;
      sol.included.assign(inst.mkp().n, 0);
      sol.residual = inst.mkp().capacities;
      state.solution = std::move(sol);
      break;
    }
    case ProblemKind::MaxCut: {
      MaxCutSolution sol;
      sol.side.assign(inst.maxcut().n, MaxCutSolution::kUnassigned);
      sol.cut_value = 0;
      state.solution = std::move(sol);
      break;
    }
  }
  state.instance = std::move(instance);
  return state;
}

ValidationReport validate_solution(const ProblemInstance& instance,
                                   const Solution& solution) {
  ValidationReport report;
  const bool kind_ok =
      (instance.kind == ProblemKind::Tsp &&
       std::holds_alternative<TspSolution>(solution)) ||
      (instance.kind == ProblemKind::Mkp &&
       std::holds_alternative<MkpSolution>(solution)) ||
      (instance.kind == ProblemKind::MaxCut &&
       std::holds_alternative<MaxCutSolution>(solution));
  if (!kind_ok) {
    report.valid = false;
    report.violations.push_back("solution kind does not match instance");
    return report;
  }
  switch (instance.kind) {
    case ProblemKind::Tsp:
      detail::tsp_validate(instance.tsp(), std::get<TspSolution>(solution),
                           report.violations);
      break;
    case ProblemKind::Mkp:
      detail::mkp_validate(instance.mkp(), std::get<MkpSolution>(solution),
                           report.violations);
      break;
    case ProblemKind::MaxCut:
      detail::maxcut_validate(instance.maxcut(),
                              std::get<MaxCutSolution>(solution),
                              report.violations);
      break;
  }
  report.valid = report.violations.empty();
  return report;
}

double evaluate_cost(const ProblemInstance& instance, const Solution& solution) {
  const ValidationReport report = validate_solution(instance, solution);
  if (!report.valid) {
    for (const auto& v : report.violations) {
      if (v.rfind("incomplete", 0) != 0 && v.rfind("unassigned", 0) != 0) {
        throw Error(Errc::InfeasibleSolution, v);
      }
    }
    throw Error(Errc::IncompleteSolution, report.violations.front());
  }
  // Recomputed from the raw solution, independent of cached values.
  switch (instance.kind) {
    case ProblemKind::Tsp:
      return detail::tsp_tour_length(instance.tsp(),
                                     std::get<TspSolution>(solution).tour);
    case ProblemKind::Mkp:
      return detail::mkp_profit(instance.mkp(),
                                std::get<MkpSolution>(solution).included);
    case ProblemKind::MaxCut:
      return detail::maxcut_cut(instance.maxcut(),
                                std::get<MaxCutSolution>(solution).side);
  }
  return 0;
}

double trajectory_cost(const Trajectory& traj) {
  const ProblemState terminal = replay(traj);
  return evaluate_cost(terminal.inst(), terminal.solution);
}

FeatureMap extract_features(const ProblemState& state) {
  const auto& inst = state.inst();
  FeatureMap features = inst.static_features;
  FeatureMap dynamic;
  switch (inst.kind) {
    case ProblemKind::Tsp:
      dynamic = detail::tsp_dynamic_features(inst.tsp(), state.tsp());
      break;
    case ProblemKind::Mkp:
      dynamic = detail::mkp_dynamic_features(inst.mkp(), state.mkp());
      break;
    case ProblemKind::MaxCut:
      dynamic = detail::maxcut_dynamic_features(inst.maxcut(), state.cut());
      break;
  }
  features.insert(features.end(), dynamic.begin(), dynamic.end());
  return features;
}

Solution recompute_caches(const ProblemInstance& instance,
                          const Solution& solution) {
  switch (instance.kind) {
    case ProblemKind::Tsp: {
      TspSolution sol;
      sol.tour = std::get<TspSolution>(solution).tour;
      sol.visited.assign(instance.tsp().n, 0);
      for (int v : sol.tour) sol.visited[v] = 1;
      return sol;
    }
    case ProblemKind::Mkp: {
      const auto& data = instance.mkp();
      MkpSolution sol;
      sol.included = std::get<MkpSolution>(solution).included;
      sol.residual = data.capacities;
      for (int r = 0; r < data.m; ++r) {
        double used = 0;
        for (int i = 0; i < data.n; ++i) {
          if (sol.included[i]) used += data.w(r, i);
        }
        sol.residual[r] = data.capacities[r] - used;
      }
      return sol;
    }
    case ProblemKind::MaxCut: {
      MaxCutSolution sol;
      sol.side = std::get<MaxCutSolution>(solution).side;
      sol.cut_value = detail::maxcut_cut(instance.maxcut(), sol.side);
      return sol;
    }
  }
  return solution;
}

std::vector<OperationRecord> applicable_operations(const ProblemState& state,
                                                   OpKind kind) {
  std::vector<OperationRecord> ops;
  if (problem_of(kind) != state.inst().kind) return ops;
  const std::size_t grid = detail::op_grid_size(state, kind);
  for (std::size_t i = 0; i < grid; ++i) {
    const OperationRecord op = detail::op_from_grid(state, kind, i);
    if (detail::is_applicable(state, op)) ops.push_back(op);
  }
  return ops;
}

std::vector<OperationRecord> enumerate_alternatives(const ProblemState& state,
                                                    const OperationRecord& op,
                                                    std::size_t cap, Rng& rng) {
  constexpr std::size_t kMaterializeLimit = 4096;
  const std::size_t grid = detail::op_grid_size(state, op.kind);
  std::vector<OperationRecord> result;

  auto materialized = [&]() {
    std::vector<OperationRecord> all = applicable_operations(state, op.kind);
    all.erase(std::remove(all.begin(), all.end(), op), all.end());
    if (all.empty()) {
      throw Error(Errc::NoAlternative,
                  "no alternative to " + to_string(op) + " at step " +
                      std::to_string(state.step_index));
    }
    if (cap == 0 || all.size() <= cap) return all;
    // Partial Fisher-Yates: the first `cap` entries are a uniform sample.
    for (std::size_t i = 0; i < cap; ++i) {
      const std::size_t j = i + rng.uniform_index(all.size() - i);
      std::swap(all[i], all[j]);
    }
    all.resize(cap);
    return all;
  };

  if (cap == 0 || grid <= kMaterializeLimit) return materialized();

  // Rejection sampling over the parameter grid avoids materializing large
  // neighborhoods; applicable operations are hit uniformly.
  std::unordered_set<std::size_t> tried;
  const std::size_t max_attempts = std::max<std::size_t>(64 * cap, 4096);
  for (std::size_t attempt = 0;
       attempt < max_attempts && result.size() < cap && tried.size() < grid;
       ++attempt) {
    const std::size_t index = rng.uniform_index(grid);
    if (!tried.insert(index).second) continue;
    const OperationRecord candidate = detail::op_from_grid(state, op.kind, index);
    if (candidate == op || !detail::is_applicable(state, candidate)) continue;
    result.push_back(candidate);
  }
  if (result.size() < cap) return materialized();
  return result;
}

std::string format_sig4(double value) {
  if (value == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", value);
  return buf;
}

std::string render_features(const FeatureMap& features, std::size_t budget) {
  std::string out;
  for (const auto& [name, value] : features) {
    std::string line = name + "=" + format_sig4(value) + "\n";
    if (out.size() + line.size() > budget) break;
    out += line;
  }
  return out;
}

}  // namespace hh
