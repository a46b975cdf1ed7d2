#include <algorithm>
#include <cmath>

#include "detail.hpp"

namespace hh::detail {

namespace {
constexpr std::int8_t kUnassigned = MaxCutSolution::kUnassigned;
}

FeatureMap maxcut_static_features(const MaxCutData& data) {
  MomentAccumulator weights;
  for (const auto& e : data.edges) weights.add(e.w);
  const Moments w = weights.result();
  MomentAccumulator degree;
  for (int v = 0; v < data.n; ++v) {
    double total = 0;
    for (const auto& [u, wt] : data.adj[v]) total += wt;
    degree.add(total);
  }
  const double edges = static_cast<double>(data.edges.size());
  const double pairs = data.n > 1 ? data.n * (data.n - 1) / 2.0 : 0.0;
  return {
      {"average_node_degree", data.n > 0 ? 2.0 * edges / data.n : 0.0},
      {"edge_density", pairs > 0 ? edges / pairs : 0.0},
      {"average_edge_weight", w.mean},
      {"max_edge_weight", w.max},
      {"min_edge_weight", w.min},
      {"standard_deviation_edge_weight", std::sqrt(w.variance)},
      // Spread of weighted node degrees.
      {"weighted_degree_distribution", std::sqrt(degree.result().variance)},
  };
}

double maxcut_cut(const MaxCutData& data, const std::vector<std::int8_t>& side) {
  double total = 0;
  for (const auto& e : data.edges) {
    if (side[e.u] != kUnassigned && side[e.v] != kUnassigned &&
        side[e.u] != side[e.v]) {
      total += e.w;
    }
  }
  return total;
}

double maxcut_move_delta(const MaxCutData& data,
                         const std::vector<std::int8_t>& side, int node,
                         int to_side) {
  const int from = side[node];
  double delta = 0;
  for (const auto& [u, w] : data.adj[node]) {
    const int su = side[u];
    if (su == kUnassigned) continue;
    const bool was = from != kUnassigned && from != su;
    const bool now = to_side != kUnassigned && to_side != su;
    if (was != now) delta += now ? w : -w;
  }
  return delta;
}

bool maxcut_applicable(const MaxCutData& data, const MaxCutSolution& sol,
                       const OperationRecord& op) {
  const auto& a = op.args;
  auto valid = [&](int v) { return v >= 0 && v < data.n; };
  switch (op.kind) {
    case OpKind::AssignNode:
      return valid(a[0]) && (a[1] == 0 || a[1] == 1) && sol.side[a[0]] != a[1];
    case OpKind::SwapNode:
      return valid(a[0]) && valid(a[1]) && sol.side[a[0]] == 0 &&
             sol.side[a[1]] == 1;
    case OpKind::RemoveNode:
      return valid(a[0]) && sol.side[a[0]] != kUnassigned;
    default:
      return false;
  }
}

namespace {

void move(const MaxCutData& data, MaxCutSolution& sol, int node, int to) {
  sol.cut_value += maxcut_move_delta(data, sol.side, node, to);
  sol.side[node] = static_cast<std::int8_t>(to);
}

}  // namespace

void maxcut_apply(const MaxCutData& data, MaxCutSolution& sol,
                  const OperationRecord& op) {
  const auto& a = op.args;
  switch (op.kind) {
    case OpKind::AssignNode: move(data, sol, a[0], a[1]); break;
    case OpKind::SwapNode:
      move(data, sol, a[0], 1);
      move(data, sol, a[1], 0);
      break;
    case OpKind::RemoveNode: move(data, sol, a[0], kUnassigned); break;
    default: break;
  }
}

FeatureMap maxcut_dynamic_features(const MaxCutData& data,
                                   const MaxCutSolution& sol) {
  int count[2] = {0, 0};
  for (auto s : sol.side) {
    if (s != kUnassigned) ++count[s];
  }
  const int assigned = count[0] + count[1];
  int cut_edges = 0;
  int internal = 0;
  MomentAccumulator internal_weights;
  std::vector<char> boundary(data.n, 0);
  for (const auto& e : data.edges) {
    const int su = sol.side[e.u], sv = sol.side[e.v];
    if (su == kUnassigned || sv == kUnassigned) continue;
    if (su != sv) {
      ++cut_edges;
      boundary[e.u] = boundary[e.v] = 1;
    } else {
      ++internal;
      internal_weights.add(e.w);
    }
  }
  const auto boundary_nodes = std::count(boundary.begin(), boundary.end(), 1);
  const double n = static_cast<double>(data.n);
  return {
      {"imbalance_ratio",
       assigned > 0 ? std::abs(count[0] - count[1]) / static_cast<double>(assigned)
                    : 0.0},
      {"cut_value", sol.cut_value},
      {"average_cut_edge_weight", cut_edges > 0 ? sol.cut_value / cut_edges : 0.0},
      {"selected_nodes_ratio", assigned / n},
      {"unselected_nodes_ratio", (data.n - assigned) / n},
      {"internal_edges", static_cast<double>(internal)},
      {"edge_weight_variance_within_sets", internal_weights.result().variance},
      {"boundary_nodes", static_cast<double>(boundary_nodes)},
      {"boundary_node_ratio", boundary_nodes / n},
  };
}

void maxcut_validate(const MaxCutData& data, const MaxCutSolution& sol,
                     std::vector<std::string>& violations) {
  if (sol.side.size() != static_cast<std::size_t>(data.n)) {
    violations.push_back("assignment has wrong size");
    return;
  }
  int unassigned = 0;
  for (auto s : sol.side) {
    if (s == kUnassigned) ++unassigned;
    else if (s != 0 && s != 1) violations.push_back("invalid side value");
  }
  if (unassigned > 0) {
    violations.push_back("unassigned nodes: " + std::to_string(unassigned));
  }
  const double recomputed = maxcut_cut(data, sol.side);
  if (std::abs(recomputed - sol.cut_value) >
      1e-9 * std::max(1.0, std::abs(recomputed))) {
    violations.push_back("cached cut value inconsistent");
  }
}

}  // namespace hh::detail
