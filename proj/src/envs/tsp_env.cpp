#include <algorithm>
#include <cmath>
#include <limits>

#include "detail.hpp"

namespace hh::detail {

FeatureMap tsp_static_features(const TspData& data) {
  MomentAccumulator acc;
  for (int i = 0; i < data.n; ++i) {
    for (int j = i + 1; j < data.n; ++j) acc.add(data.d(i, j));
  }
  const Moments m = acc.result();
  return {
      {"average_distance", m.mean},
      {"min_distance", m.min},
      {"max_distance", m.max},
      {"std_dev_distance", std::sqrt(m.variance)},
      {"node_num", static_cast<double>(data.n)},
  };
}

double tsp_tour_length(const TspData& data, const std::vector<int>& tour) {
  if (tour.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < tour.size(); ++i) {
    total += data.d(tour[i], tour[i + 1]);
  }
  return total + data.d(tour.back(), tour.front());
}

bool tsp_applicable(const TspData& data, const TspSolution& sol,
                    const OperationRecord& op) {
  const int len = static_cast<int>(sol.tour.size());
  const auto& a = op.args;
  auto unvisited = [&](int node) {
    return node >= 0 && node < data.n && !sol.visited[node];
  };
  switch (op.kind) {
    case OpKind::Append:
      return unvisited(a[0]);
    case OpKind::Insert:
      return unvisited(a[0]) && a[1] >= 0 && a[1] <= len;
    case OpKind::Swap:
    case OpKind::ReverseSegment:
      return a[0] >= 0 && a[0] < a[1] && a[1] < len;
    case OpKind::Relocate: {
      const int start = a[0], count = a[1], dest = a[2];
      return count >= 1 && start >= 0 && start + count <= len && dest >= 0 &&
             dest <= len - count && dest != start;
    }
    default:
      return false;
  }
}

void tsp_apply(const TspData&, TspSolution& sol, const OperationRecord& op) {
  auto& tour = sol.tour;
  const auto& a = op.args;
  switch (op.kind) {
    case OpKind::Append:
      tour.push_back(a[0]);
      sol.visited[a[0]] = 1;
      break;
    case OpKind::Insert:
      tour.insert(tour.begin() + a[1], a[0]);
      sol.visited[a[0]] = 1;
      break;
    case OpKind::Swap:
      std::swap(tour[a[0]], tour[a[1]]);
      break;
    case OpKind::ReverseSegment:
      std::reverse(tour.begin() + a[0], tour.begin() + a[1] + 1);
      break;
    case OpKind::Relocate: {
      const int start = a[0], count = a[1], dest = a[2];
      std::vector<int> segment(tour.begin() + start,
                               tour.begin() + start + count);
      tour.erase(tour.begin() + start, tour.begin() + start + count);
      tour.insert(tour.begin() + dest, segment.begin(), segment.end());
      break;
    }
    default:
      break;
  }
}

FeatureMap tsp_dynamic_features(const TspData& data, const TspSolution& sol) {
  const auto& tour = sol.tour;
  const std::size_t len = tour.size();
  MomentAccumulator edges;
  if (len >= 2) {
    for (std::size_t i = 0; i < len; ++i) {
      edges.add(data.d(tour[i], tour[(i + 1) % len]));
    }
  }
  const Moments e = edges.result();
  const double current_cost = tsp_tour_length(data, tour);
  const double last_edge =
      len >= 2 ? data.d(tour[len - 2], tour[len - 1]) : 0.0;

  std::vector<int> remaining;
  for (int v = 0; v < data.n; ++v) {
    if (!sol.visited[v]) remaining.push_back(v);
  }
  MomentAccumulator rem;
  for (std::size_t i = 0; i < remaining.size(); ++i) {
    for (std::size_t j = i + 1; j < remaining.size(); ++j) {
      rem.add(data.d(remaining[i], remaining[j]));
    }
  }
  const Moments r = rem.result();

  bool valid = true;
  std::vector<char> seen(data.n, 0);
  for (int v : tour) {
    if (v < 0 || v >= data.n || seen[v]) {
      valid = false;
      break;
    }
    seen[v] = 1;
  }

  return {
      {"current_path_length", static_cast<double>(len)},
      {"remaining_nodes", static_cast<double>(remaining.size())},
      {"current_cost", current_cost},
      {"average_edge_cost", e.mean},
      {"last_edge_cost", last_edge},
      {"std_dev_edge_cost", std::sqrt(e.variance)},
      {"solution_validity", valid ? 1.0 : 0.0},
      {"min_edge_cost_remaining", r.min},
      {"max_edge_cost_remaining", r.max},
  };
}

void tsp_validate(const TspData& data, const TspSolution& sol,
                  std::vector<std::string>& violations) {
  std::vector<char> seen(data.n, 0);
  for (int v : sol.tour) {
    if (v < 0 || v >= data.n) {
      violations.push_back("node out of range: " + std::to_string(v));
      continue;
    }
    if (seen[v]) violations.push_back("duplicate node: " + std::to_string(v));
    seen[v] = 1;
  }
  if (sol.visited.size() != static_cast<std::size_t>(data.n)) {
    violations.push_back("visited set has wrong size");
  } else {
    for (int v = 0; v < data.n; ++v) {
      if (static_cast<bool>(sol.visited[v]) != static_cast<bool>(seen[v])) {
        violations.push_back("visited set inconsistent at node " +
                             std::to_string(v));
        break;
      }
    }
  }
  const auto missing = std::count(seen.begin(), seen.end(), 0);
  if (missing > 0) {
    violations.push_back("incomplete tour: " + std::to_string(missing) +
                         " nodes unvisited");
  }
}

}  // namespace hh::detail
