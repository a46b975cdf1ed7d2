#include <algorithm>
#include <limits>
#include <numeric>

#include "internal.hpp"

namespace hh::heuristics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Ctx {
  const TspData& d;
  const std::vector<int>& tour;
  const std::vector<char>& visited;
  int len() const { return static_cast<int>(tour.size()); }
};

OperationRecord insert_op(int node, int pos) {
  return {OpKind::Insert, {node, pos, 0}};
}

OperationRecord append_op(int node) { return {OpKind::Append, {node, 0, 0}}; }

int first_unvisited(const Ctx& c) {
  for (int v = 0; v < c.d.n; ++v) {
    if (!c.visited[v]) return v;
  }
  return -1;
}

// Detour cost of inserting `node` before tour position `pos` on the closed tour.
double insertion_cost(const Ctx& c, int node, int pos) {
  const int L = c.len();
  if (L == 0) return 0;
  if (L == 1) return 2 * c.d.d(c.tour[0], node);
  const int prev = c.tour[(pos - 1 + L) % L];
  const int next = c.tour[pos % L];
  return c.d.d(prev, node) + c.d.d(node, next) - c.d.d(prev, next);
}

std::pair<double, int> best_insertion(const Ctx& c, int node) {
  const int L = c.len();
  if (L <= 1) return {insertion_cost(c, node, L), L};
  double best = kInf;
  int pos = 0;
  for (int p = 0; p < L; ++p) {
    const double cost = insertion_cost(c, node, p);
    if (cost < best) {
      best = cost;
      pos = p;
    }
  }
  return {best, pos};
}

double min_distance_to_tour(const Ctx& c, int node) {
  double best = kInf;
  for (int t : c.tour) best = std::min(best, c.d.d(node, t));
  return best;
}

struct TwoOptMove {
  int i = 0;
  int j = 0;
  double delta = 0;
};

double two_opt_delta(const Ctx& c, int i, int j) {
  const int L = c.len();
  const int a = c.tour[(i - 1 + L) % L];
  const int b = c.tour[i];
  const int e = c.tour[j];
  const int f = c.tour[(j + 1) % L];
  return c.d.d(a, e) + c.d.d(b, f) - c.d.d(a, b) - c.d.d(e, f);
}

std::optional<TwoOptMove> find_two_opt(const Ctx& c, bool first_improvement) {
  const int L = c.len();
  if (L < 4) return std::nullopt;
  std::optional<TwoOptMove> best;
  for (int i = 0; i < L - 1; ++i) {
    for (int j = i + 1; j < L; ++j) {
      if (i == 0 && j == L - 1) continue;
      const double delta = two_opt_delta(c, i, j);
      if (delta < -kImproveEps && (!best || delta < best->delta)) {
        best = TwoOptMove{i, j, delta};
        if (first_improvement) return best;
      }
    }
  }
  return best;
}

OperationRecord reverse_op(const TwoOptMove& m) {
  return {OpKind::ReverseSegment, {m.i, m.j, 0}};
}

// Best improving segment relocation with segment length <= max_len.
std::optional<std::pair<OperationRecord, double>> find_relocate(const Ctx& c,
                                                                int max_len) {
  const int L = c.len();
  std::optional<std::pair<OperationRecord, double>> best;
  for (int count = 1; count <= max_len && count <= L - 2; ++count) {
    const int rest = L - count;
    for (int s = 0; s + count <= L; ++s) {
      const int first = c.tour[s];
      const int last = c.tour[s + count - 1];
      const int prev = c.tour[(s - 1 + L) % L];
      const int next = c.tour[(s + count) % L];
      const double removal =
          c.d.d(prev, first) + c.d.d(last, next) - c.d.d(prev, next);
      auto reduced = [&](int k) { return k < s ? c.tour[k] : c.tour[k + count]; };
      for (int dest = 0; dest <= rest; ++dest) {
        if (dest == s) continue;
        const int x = reduced((dest - 1 + rest) % rest);
        const int y = reduced(dest % rest);
        const double add = c.d.d(x, first) + c.d.d(last, y) - c.d.d(x, y);
        const double delta = add - removal;
        if (delta < -kImproveEps && (!best || delta < best->second)) {
          best = std::make_pair(OperationRecord{OpKind::Relocate, {s, count, dest}},
                                delta);
        }
      }
    }
  }
  return best;
}

std::optional<OperationRecord> periodic_two_opt(const HeuristicGenome& g,
                                                const Ctx& c) {
  if (!g.flag("periodic_2opt")) return std::nullopt;
  const int freq = std::max(1, static_cast<int>(g.param("apply_2opt_frequency")));
  if (c.len() < 4 || c.len() % freq != 0) return std::nullopt;
  if (auto m = find_two_opt(c, false)) return reverse_op(*m);
  return std::nullopt;
}

int sub_central_node(const TspData& d) {
  std::vector<double> avg(d.n, 0);
  for (int i = 0; i < d.n; ++i) {
    for (int j = 0; j < d.n; ++j) avg[i] += d.d(i, j);
    avg[i] /= std::max(1, d.n - 1);
  }
  std::vector<int> order(d.n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return avg[a] < avg[b]; });
  return d.n > 1 ? order[1] : order[0];
}

OperationRecord nearest_neighbor(const HeuristicGenome& g, const Ctx& c) {
  const int L = c.len();
  const int last = c.tour.back();
  std::vector<int> candidates;
  for (int v = 0; v < c.d.n; ++v) {
    if (!c.visited[v]) candidates.push_back(v);
  }
  if (g.flag("limit_candidates")) {
    double avg = 0;
    int nearest = candidates.front();
    for (int v : candidates) {
      avg += c.d.d(last, v);
      if (c.d.d(last, v) < c.d.d(last, nearest)) nearest = v;
    }
    avg /= static_cast<double>(candidates.size());
    const double dmin = c.d.d(last, nearest);
    if (dmin < g.param("threshold_factor") * avg) return insert_op(nearest, L);
    const double limit = (1 + g.param("percentage_range")) * dmin;
    std::erase_if(candidates, [&](int v) { return c.d.d(last, v) > limit; });
  }
  const double w = g.param("future_cost_weight");
  const bool best_pos = g.flag("best_position_insertion");
  const double visit_scale = static_cast<double>(L) / c.d.n / c.d.n;
  double best = kInf;
  OperationRecord op = insert_op(candidates.front(), L);
  for (int v : candidates) {
    double immediate = c.d.d(last, v);
    int pos = L;
    if (best_pos) std::tie(immediate, pos) = best_insertion(c, v);
    double score = immediate;
    if (w != 0) {
      double future = 0;
      for (int u = 0; u < c.d.n; ++u) {
        if (!c.visited[u] && u != v) future += c.d.d(v, u);
      }
      score += w * visit_scale * future;
    }
    if (score < best) {
      best = score;
      op = insert_op(v, pos);
    }
  }
  return op;
}

OperationRecord cheapest_insertion(const Ctx& c) {
  double best = kInf;
  OperationRecord op{};
  for (int v = 0; v < c.d.n; ++v) {
    if (c.visited[v]) continue;
    const auto [cost, pos] = best_insertion(c, v);
    if (cost < best) {
      best = cost;
      op = insert_op(v, pos);
    }
  }
  return op;
}

template <class Better>
OperationRecord select_then_insert(const Ctx& c, Better better) {
  int chosen = -1;
  double chosen_score = 0;
  for (int v = 0; v < c.d.n; ++v) {
    if (c.visited[v]) continue;
    const double score = min_distance_to_tour(c, v);
    if (chosen < 0 || better(score, chosen_score)) {
      chosen = v;
      chosen_score = score;
    }
  }
  return insert_op(chosen, best_insertion(c, chosen).second);
}

OperationRecord random_pairwise(const Ctx& c, Rng& rng) {
  std::vector<int> open;
  for (int v = 0; v < c.d.n; ++v) {
    if (!c.visited[v]) open.push_back(v);
  }
  const int a = open[rng.uniform_index(open.size())];
  int chosen = a;
  if (open.size() > 1) {
    int b = open[rng.uniform_index(open.size() - 1)];
    if (b == a) b = open.back();
    if (best_insertion(c, b).first < best_insertion(c, a).first) chosen = b;
  }
  return insert_op(chosen, best_insertion(c, chosen).second);
}

std::vector<int> greedy_edge_plan(const Ctx& c) {
  const int n = c.d.n;
  if (n == 1) return {0};
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<std::array<int, 2>> adj(n, {-1, -1});
  std::vector<int> deg(n, 0);
  int edges = 0;
  auto link = [&](int u, int v) {
    adj[u][deg[u]++] = v;
    adj[v][deg[v]++] = u;
    parent[find(u)] = find(v);
    ++edges;
  };
  if (c.len() >= 2) {
    for (int k = 0; k + 1 < c.len(); ++k) link(c.tour[k], c.tour[k + 1]);
  }
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    if (deg[i] == 2) continue;
    for (int j = i + 1; j < n; ++j) {
      if (deg[j] < 2) pairs.emplace_back(i, j);
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [&](auto a, auto b) {
    return c.d.d(a.first, a.second) < c.d.d(b.first, b.second);
  });
  for (const auto& [i, j] : pairs) {
    if (edges == n - 1) break;
    if (deg[i] < 2 && deg[j] < 2 && find(i) != find(j)) link(i, j);
  }
  std::vector<int> ends;
  for (int v = 0; v < n; ++v) {
    if (deg[v] < 2) ends.push_back(v);
  }
  if (n > 2) link(ends[0], ends[1]);

  int start, prev;
  if (c.len() >= 2) {
    start = c.tour[0];
    prev = adj[start][0] == c.tour[1] ? adj[start][1] : adj[start][0];
  } else {
    start = c.len() == 1 ? c.tour[0] : ends[0];
    prev = n > 2 ? std::max(adj[start][0], adj[start][1]) : -1;
  }
  std::vector<int> plan{start};
  int cur = start;
  while (static_cast<int>(plan.size()) < n) {
    const int next = adj[cur][0] != prev ? adj[cur][0] : adj[cur][1];
    plan.push_back(next);
    prev = cur;
    cur = next;
  }
  return plan;
}

OperationRecord greedy_edge(const Ctx& c, AlgorithmData& data) {
  auto& stored = data.values["greedy_edge_plan"];
  bool valid = static_cast<int>(stored.size()) == c.d.n;
  for (int k = 0; valid && k < c.len(); ++k) {
    valid = static_cast<int>(stored[k]) == c.tour[k];
  }
  if (!valid) {
    const auto plan = greedy_edge_plan(c);
    stored.assign(plan.begin(), plan.end());
  }
  return append_op(static_cast<int>(stored[c.len()]));
}

OperationRecord grasp(const HeuristicGenome& g, const Ctx& c, Rng& rng) {
  const int last = c.tour.back();
  double lo = kInf, hi = -kInf;
  for (int v = 0; v < c.d.n; ++v) {
    if (c.visited[v]) continue;
    lo = std::min(lo, c.d.d(last, v));
    hi = std::max(hi, c.d.d(last, v));
  }
  const double threshold = lo + g.param("rcl_alpha") * (hi - lo);
  std::vector<int> rcl;
  for (int v = 0; v < c.d.n; ++v) {
    if (!c.visited[v] && c.d.d(last, v) <= threshold) rcl.push_back(v);
  }
  return append_op(rcl[rng.uniform_index(rcl.size())]);
}

}  // namespace

std::optional<OperationRecord> tsp_step(const HeuristicGenome& genome,
                                        const ProblemState& state,
                                        AlgorithmData& data, Rng& rng) {
  const auto& sol = state.tsp();
  const Ctx c{state.inst().tsp(), sol.tour, sol.visited};
  const Family f = genome.family;
  const bool complete = c.len() == c.d.n;

  if (f == Family::TwoOpt) {
    if (auto m = find_two_opt(c, genome.flag("first_improvement"))) {
      return reverse_op(*m);
    }
    return std::nullopt;
  }
  if (f == Family::ThreeOpt) {
    const auto two = find_two_opt(c, false);
    const auto reloc =
        find_relocate(c, static_cast<int>(genome.param("max_segment_length")));
    if (two && (!reloc || two->delta <= reloc->second)) return reverse_op(*two);
    if (reloc) return reloc->first;
    return std::nullopt;
  }

  if (c.len() == 0) {
    if (f == Family::Grasp || f == Family::RandomPairwiseInsertion) {
      return append_op(static_cast<int>(rng.uniform_index(c.d.n)));
    }
    if (f == Family::GreedyEdge) return greedy_edge(c, data);
    if (f == Family::NearestNeighbor && genome.flag("sub_central_start")) {
      return append_op(sub_central_node(c.d));
    }
    return append_op(first_unvisited(c));
  }
  if (auto op = periodic_two_opt(genome, c)) return op;
  if (complete) return std::nullopt;

  switch (f) {
    case Family::NearestNeighbor: return nearest_neighbor(genome, c);
    case Family::CheapestInsertion: return cheapest_insertion(c);
    case Family::FarthestInsertion:
      return select_then_insert(c, [](double a, double b) { return a > b; });
    case Family::NearestInsertion:
      return select_then_insert(c, [](double a, double b) { return a < b; });
    case Family::RandomPairwiseInsertion: return random_pairwise(c, rng);
    case Family::GreedyEdge: return greedy_edge(c, data);
    case Family::Grasp: return grasp(genome, c, rng);
    case Family::InsertionGeneric: {
      const int v = first_unvisited(c);
      return insert_op(v, best_insertion(c, v).second);
    }
    default: break;
  }
  throw Error(Errc::HeuristicFault, genome.id + " is not a TSP heuristic");
}

}  // namespace hh::heuristics
