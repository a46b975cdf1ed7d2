#pragma once

// Shared fixtures and independent reference computations for the tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hh/core.hpp"
#include "hh/engine.hpp"
#include "hh/envs.hpp"
#include "hh/heuristics.hpp"
#include "hh/rng.hpp"

namespace hh::test {

// Corners (0,0),(0,1),(1,1),(1,0) with unrounded distances.
inline InstancePtr unit_square() {
  return make_tsp_from_coords("unit_square", {{0, 0}, {0, 1}, {1, 1}, {1, 0}},
                              EdgeWeightType::Exact);
}

inline InstancePtr random_tsp(int n, std::uint64_t seed, double scale = 100) {
  Rng rng(seed);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back({std::floor(rng.uniform01() * scale), std::floor(rng.uniform01() * scale)});
  }
  return make_tsp_from_coords("rand_tsp_" + std::to_string(seed), pts,
                              EdgeWeightType::Euc2d);
}

inline InstancePtr random_mkp(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> profits(n);
  for (auto& p : profits) p = static_cast<double>(rng.uniform_int(1, 100));
  std::vector<std::vector<double>> rows(m, std::vector<double>(n));
  std::vector<double> caps(m);
  for (int r = 0; r < m; ++r) {
    double sum = 0;
    for (auto& w : rows[r]) {
      w = static_cast<double>(rng.uniform_int(1, 50));
      sum += w;
    }
    caps[r] = std::floor(0.5 * sum);
  }
  return make_mkp("rand_mkp_" + std::to_string(seed), profits, rows, caps);
}

inline InstancePtr random_maxcut(int n, double density, std::uint64_t seed,
                                 bool allow_negative = false) {
  Rng rng(seed);
  std::vector<CutEdge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (rng.uniform01() < density) {
        double w = static_cast<double>(rng.uniform_int(1, 10));
        if (allow_negative && rng.bernoulli(0.3)) w = -w;
        edges.push_back({u, v, w});
      }
    }
  }
  return make_maxcut("rand_cut_" + std::to_string(seed), n, edges);
}

// Closed tour length straight from coordinates or the matrix.
inline double ref_tour_length(const TspData& d, const std::vector<int>& tour) {
  double total = 0;
  for (std::size_t k = 0; k < tour.size(); ++k) {
    total += d.d(tour[k], tour[(k + 1) % tour.size()]);
  }
  return tour.size() < 2 ? 0.0 : total;
}

inline double brute_force_tsp(const TspData& d) {
  std::vector<int> perm(d.n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, ref_tour_length(d, perm));
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return best;
}

inline double brute_force_mkp(const MkpData& d) {
  double best = 0;
  for (std::uint32_t mask = 0; mask < (1u << d.n); ++mask) {
    bool ok = true;
    for (int r = 0; r < d.m && ok; ++r) {
      double used = 0;
      for (int i = 0; i < d.n; ++i) {
        if (mask >> i & 1u) used += d.w(r, i);
      }
      ok = used <= d.capacities[r];
    }
    if (!ok) continue;
    double profit = 0;
    for (int i = 0; i < d.n; ++i) {
      if (mask >> i & 1u) profit += d.profits[i];
    }
    best = std::max(best, profit);
  }
  return best;
}

inline double ref_cut(const MaxCutData& d, const std::vector<std::int8_t>& side) {
  double total = 0;
  for (const auto& e : d.edges) {
    if (side[e.u] >= 0 && side[e.v] >= 0 && side[e.u] != side[e.v]) total += e.w;
  }
  return total;
}

inline double brute_force_maxcut(const MaxCutData& d) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << d.n); ++mask) {
    std::vector<std::int8_t> side(d.n);
    for (int v = 0; v < d.n; ++v) side[v] = static_cast<std::int8_t>(mask >> v & 1u);
    best = std::max(best, ref_cut(d, side));
  }
  return best;
}

inline ProblemState apply_all(ProblemState s, const std::vector<OperationRecord>& ops) {
  for (const auto& op : ops) s = apply_operation(s, op);
  return s;
}

inline ProblemState random_partial_tour(const InstancePtr& inst, Rng& rng, int len) {
  std::vector<int> nodes(inst->tsp().n);
  std::iota(nodes.begin(), nodes.end(), 0);
  shuffle(nodes, rng);
  auto s = initial_state(inst);
  for (int k = 0; k < len; ++k) s = apply_operation(s, {OpKind::Append, {nodes[k], 0, 0}});
  return s;
}

inline ProblemState random_mkp_state(const InstancePtr& inst, Rng& rng) {
  auto s = initial_state(inst);
  for (int k = 0; k < inst->mkp().n; ++k) {
    const auto ops = applicable_operations(s, OpKind::Add);
    if (ops.empty() || rng.bernoulli(0.3)) break;
    s = apply_operation(s, ops[rng.uniform_index(ops.size())]);
  }
  return s;
}

inline ProblemState random_cut_state(const InstancePtr& inst, Rng& rng, double assigned_fraction) {
  auto s = initial_state(inst);
  for (int v = 0; v < inst->maxcut().n; ++v) {
    if (rng.uniform01() < assigned_fraction) {
      s = apply_operation(s, {OpKind::AssignNode, {v, static_cast<int>(rng.uniform_index(2)), 0}});
    }
  }
  return s;
}

// True when some operation in `ops` strictly improves on `s`.
inline bool any_improving(const ProblemState& s, const std::vector<OperationRecord>& ops) {
  const double base = objective_value(s);
  for (const auto& o : ops) {
    const double c = objective_value(apply_operation(s, o));
    if (improvement(base, c, s.inst().sense()) > 1e-9) return true;
  }
  return false;
}

inline ProblemState run_to_fixpoint(const HeuristicGenome& g, ProblemState s) {
  AlgorithmData data;
  Rng rng(3);
  for (int k = 0; k < 10000; ++k) {
    auto o = heuristic_step(g, s, data, rng).operation;
    if (!o) return s;
    s = apply_operation(s, *o);
  }
  throw std::runtime_error("no fixpoint reached");
}

// Exact expected terminal cost of the random-completion process for a pool
// of rng-free heuristics, by enumerating every draw sequence with its
// probability. A drawn heuristic runs until its first rejected operation.
inline double exact_completion_expectation(const ProblemState& s,
                                           const std::vector<HeuristicGenome>& pool,
                                           unsigned failed) {
  const unsigned all = (1u << pool.size()) - 1;
  if (failed == all) return evaluate_cost(s.inst(), s.solution);
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!(failed & (1u << i))) open.push_back(i);
  }
  double total = 0;
  for (std::size_t i : open) {
    ProblemState cur = s;
    AlgorithmData data;
    Rng rng(0);
    int accepted = 0;
    while (true) {
      const auto op = heuristic_step(pool[i], cur, data, rng).operation;
      if (!op) break;
      const ProblemState next = apply_operation(cur, *op);
      const bool ok = is_constructive(cur, *op) ||
                      objective_value(next) < objective_value(cur);
      if (!ok) break;
      cur = next;
      ++accepted;
    }
    const unsigned next_failed = accepted > 0 ? (1u << i) : (failed | (1u << i));
    total += exact_completion_expectation(cur, pool, next_failed);
  }
  return total / static_cast<double>(open.size());
}

inline std::vector<int> tour_of(const ProblemState& s) { return s.tsp().tour; }

inline double replay_cost(const Trajectory& t) {
  const auto end = replay(t);
  return ref_tour_length(end.inst().tsp(), tour_of(end));
}

}  // namespace hh::test
