#include <cmath>
#include <limits>

#include "../envs/detail.hpp"
#include "internal.hpp"

namespace hh::heuristics {

namespace {

constexpr std::int8_t kUnassigned = MaxCutSolution::kUnassigned;
constexpr int kTemperatureSamples = 100;

struct Ctx {
  const MaxCutData& d;
  const std::vector<std::int8_t>& side;
  double delta(int node, int to) const {
    return detail::maxcut_move_delta(d, side, node, to);
  }
};

OperationRecord assign_op(int node, int side) {
  return {OpKind::AssignNode, {node, side, 0}};
}

int best_side(const Ctx& c, int node) {
  return c.delta(node, 1) > c.delta(node, 0) ? 1 : 0;
}

std::optional<OperationRecord> highest_delta_node(const Ctx& c) {
  std::optional<OperationRecord> best;
  double best_gain = 0;
  for (int v = 0; v < c.d.n; ++v) {
    if (c.side[v] != kUnassigned) continue;
    for (int s = 0; s < 2; ++s) {
      const double g = c.delta(v, s);
      if (!best || g > best_gain) {
        best = assign_op(v, s);
        best_gain = g;
      }
    }
  }
  return best;
}

std::optional<OperationRecord> most_weight_neighbors(const Ctx& c) {
  int chosen = -1;
  double best = -1;
  bool any_assigned = false;
  for (auto s : c.side) any_assigned = any_assigned || s != kUnassigned;
  for (int v = 0; v < c.d.n; ++v) {
    if (c.side[v] != kUnassigned) continue;
    double tie = 0;
    for (const auto& [u, w] : c.d.adj[v]) {
      if (!any_assigned || c.side[u] != kUnassigned) tie += std::abs(w);
    }
    if (tie > best) {
      best = tie;
      chosen = v;
    }
  }
  if (chosen < 0) return std::nullopt;
  return assign_op(chosen, best_side(c, chosen));
}

std::optional<OperationRecord> highest_weight_edge(const Ctx& c) {
  const CutEdge* chosen = nullptr;
  for (const auto& e : c.d.edges) {
    if (c.side[e.u] != kUnassigned && c.side[e.v] != kUnassigned) continue;
    if (!chosen || e.w > chosen->w) chosen = &e;
  }
  if (!chosen) return highest_delta_node(c);
  const bool u_open = c.side[chosen->u] == kUnassigned;
  const int node = u_open ? chosen->u : chosen->v;
  const int other = u_open ? chosen->v : chosen->u;
  if (c.side[other] != kUnassigned) return assign_op(node, 1 - c.side[other]);
  return assign_op(node, best_side(c, node));
}

std::optional<OperationRecord> balanced_cut(const Ctx& c) {
  int count[2] = {0, 0};
  for (auto s : c.side) {
    if (s != kUnassigned) ++count[s];
  }
  const int target = count[1] < count[0] ? 1 : 0;
  int chosen = -1;
  double best = 0;
  for (int v = 0; v < c.d.n; ++v) {
    if (c.side[v] != kUnassigned) continue;
    const double g = c.delta(v, target);
    if (chosen < 0 || g > best) {
      chosen = v;
      best = g;
    }
  }
  if (chosen < 0) return std::nullopt;
  return assign_op(chosen, target);
}

double edge_weight(const Ctx& c, int u, int v) {
  for (const auto& [x, w] : c.d.adj[u]) {
    if (x == v) return w;
  }
  return 0;
}

std::optional<OperationRecord> highest_delta_edge(const Ctx& c) {
  std::optional<OperationRecord> best;
  double best_gain = 0;
  for (const auto& e : c.d.edges) {
    const bool u_open = c.side[e.u] == kUnassigned;
    const bool v_open = c.side[e.v] == kUnassigned;
    if (!u_open && !v_open) continue;
    if (u_open && v_open) {
      for (int s = 0; s < 2; ++s) {
        const double g = c.delta(e.u, s) + c.delta(e.v, 1 - s) + e.w;
        if (!best || g > best_gain) {
          best = assign_op(e.u, s);
          best_gain = g;
        }
      }
    } else {
      const int node = u_open ? e.u : e.v;
      const int s = best_side(c, node);
      const double g = c.delta(node, s);
      if (!best || g > best_gain) {
        best = assign_op(node, s);
        best_gain = g;
      }
    }
  }
  if (!best) return highest_delta_node(c);
  return best;
}

std::optional<OperationRecord> best_flip(const Ctx& c, double& gain) {
  std::optional<OperationRecord> best;
  for (int v = 0; v < c.d.n; ++v) {
    if (c.side[v] == kUnassigned) continue;
    const double g = c.delta(v, 1 - c.side[v]);
    if (g > gain + kImproveEps) {
      gain = g;
      best = assign_op(v, 1 - c.side[v]);
    }
  }
  return best;
}

double swap_gain(const Ctx& c, int u, int v) {
  return c.delta(u, 1) + c.delta(v, 0) + 2 * edge_weight(c, u, v);
}

std::optional<OperationRecord> find_swap(const Ctx& c, bool first_improvement,
                                         double& gain) {
  std::optional<OperationRecord> best;
  for (int u = 0; u < c.d.n; ++u) {
    if (c.side[u] != 0) continue;
    for (int v = 0; v < c.d.n; ++v) {
      if (c.side[v] != 1) continue;
      const double g = swap_gain(c, u, v);
      if (g > gain + kImproveEps) {
        gain = g;
        best = OperationRecord{OpKind::SwapNode, {u, v, 0}};
        if (first_improvement) return best;
      }
    }
  }
  return best;
}

std::optional<OperationRecord> simulated_annealing(const HeuristicGenome& g,
                                                   const Ctx& c,
                                                   AlgorithmData& data,
                                                   Rng& rng) {
  std::vector<int> assigned;
  for (int v = 0; v < c.d.n; ++v) {
    if (c.side[v] != kUnassigned) assigned.push_back(v);
  }
  if (assigned.empty()) return std::nullopt;
  auto& temp = data.values["sa_temperature"];
  if (temp.empty()) {
    double total = 0;
    for (int k = 0; k < kTemperatureSamples; ++k) {
      const int v = assigned[rng.uniform_index(assigned.size())];
      total += std::abs(c.delta(v, 1 - c.side[v]));
    }
    const double t0 = total / kTemperatureSamples;
    temp.push_back(t0 > 0 ? t0 : 1.0);
  }
  const double t = temp[0];
  temp[0] *= g.param("cooling_ratio");
  const int proposals = static_cast<int>(g.param("proposals_per_call"));
  for (int k = 0; k < proposals; ++k) {
    const int v = assigned[rng.uniform_index(assigned.size())];
    const double delta = c.delta(v, 1 - c.side[v]);
    if (delta > 0 || rng.uniform01() < std::exp(delta / t)) {
      return assign_op(v, 1 - c.side[v]);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<OperationRecord> maxcut_step(const HeuristicGenome& genome,
                                           const ProblemState& state,
                                           AlgorithmData& data, Rng& rng) {
  const Ctx c{state.inst().maxcut(), state.cut().side};
  double gain = 0;
  switch (genome.family) {
    case Family::GreedySwap: return find_swap(c, true, gain);
    case Family::MultiSwap2: {
      auto flip = best_flip(c, gain);
      auto swap = find_swap(c, false, gain);
      return swap ? swap : flip;
    }
    case Family::SimulatedAnnealing:
      return simulated_annealing(genome, c, data, rng);
    default: break;
  }
  std::optional<OperationRecord> op;
  switch (genome.family) {
    case Family::MostWeightNeighbors: op = most_weight_neighbors(c); break;
    case Family::HighestWeightEdge: op = highest_weight_edge(c); break;
    case Family::BalancedCut: op = balanced_cut(c); break;
    case Family::HighestDeltaNode: op = highest_delta_node(c); break;
    case Family::HighestDeltaEdge: op = highest_delta_edge(c); break;
    default:
      throw Error(Errc::HeuristicFault, genome.id + " is not a MaxCut heuristic");
  }
  if (!op && genome.flag("local_search_finish")) return best_flip(c, gain);
  return op;
}

}  // namespace hh::heuristics
