#include <cmath>
#include <limits>

#include "../envs/detail.hpp"
#include "internal.hpp"

namespace hh::heuristics {

namespace {

constexpr double kWeightEpsilon = 1e-6;

struct Ctx {
  const MkpData& d;
  const MkpSolution& sol;
};

bool fits(const Ctx& c, int item) {
  for (int r = 0; r < c.d.m; ++r) {
    if (c.d.w(r, item) > c.sol.residual[r] + detail::kCapacityEps) return false;
  }
  return true;
}

bool swap_fits(const Ctx& c, int out, int in) {
  for (int r = 0; r < c.d.m; ++r) {
    if (c.d.w(r, in) > c.sol.residual[r] + c.d.w(r, out) + detail::kCapacityEps) {
      return false;
    }
  }
  return true;
}

double total_weight(const Ctx& c, int item) {
  double w = 0;
  for (int r = 0; r < c.d.m; ++r) w += c.d.w(r, item);
  return w;
}

OperationRecord add_op(int item) { return {OpKind::Add, {item, 0, 0}}; }

// Highest-scoring fitting excluded item; lowest id on ties.
template <class Score>
std::optional<OperationRecord> greedy_add(const Ctx& c, Score score) {
  int chosen = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.d.n; ++i) {
    if (c.sol.included[i] || !fits(c, i)) continue;
    const double s = score(i);
    if (chosen < 0 || s > best) {
      chosen = i;
      best = s;
    }
  }
  if (chosen < 0) return std::nullopt;
  return add_op(chosen);
}

std::optional<OperationRecord> find_swap(const Ctx& c, bool first_improvement) {
  std::optional<OperationRecord> best;
  double best_gain = 0;
  for (int out = 0; out < c.d.n; ++out) {
    if (!c.sol.included[out]) continue;
    for (int in = 0; in < c.d.n; ++in) {
      if (c.sol.included[in]) continue;
      const double gain = c.d.profits[in] - c.d.profits[out];
      if (gain <= kImproveEps || gain <= best_gain) continue;
      if (!swap_fits(c, out, in)) continue;
      best = OperationRecord{OpKind::SwapItem, {out, in, 0}};
      best_gain = gain;
      if (first_improvement) return best;
    }
  }
  return best;
}

std::optional<OperationRecord> best_toggle_add(const Ctx& c, double& gain) {
  std::optional<OperationRecord> best;
  for (int i = 0; i < c.d.n; ++i) {
    if (c.sol.included[i] || !fits(c, i)) continue;
    if (c.d.profits[i] > gain + kImproveEps) {
      gain = c.d.profits[i];
      best = OperationRecord{OpKind::Toggle, {i, 0, 0}};
    }
  }
  return best;
}

std::optional<OperationRecord> k_flip(const Ctx& c, int k) {
  double gain = 0;
  auto best = best_toggle_add(c, gain);
  if (k >= 2) {
    if (auto swap = find_swap(c, false)) {
      const double g = c.d.profits[swap->args[1]] - c.d.profits[swap->args[0]];
      if (g > gain + kImproveEps) best = swap;
    }
  }
  return best;
}

std::optional<OperationRecord> block_flip(const Ctx& c, int max_len) {
  std::optional<OperationRecord> best;
  double best_gain = kImproveEps;
  std::vector<double> res(c.d.m);
  for (int start = 0; start < c.d.n; ++start) {
    res = c.sol.residual;
    double gain = 0;
    for (int len = 1; len <= max_len && start + len <= c.d.n; ++len) {
      const int i = start + len - 1;
      const double sign = c.sol.included[i] ? 1.0 : -1.0;
      for (int r = 0; r < c.d.m; ++r) res[r] += sign * c.d.w(r, i);
      gain -= sign * c.d.profits[i];
      if (gain <= best_gain) continue;
      bool ok = true;
      for (int r = 0; r < c.d.m && ok; ++r) ok = res[r] >= -detail::kCapacityEps;
      if (ok) {
        best = OperationRecord{OpKind::FlipBlock, {start, len, 0}};
        best_gain = gain;
      }
    }
  }
  return best;
}

}  // namespace

std::optional<OperationRecord> mkp_step(const HeuristicGenome& genome,
                                        const ProblemState& state,
                                        AlgorithmData&, Rng&) {
  const Ctx c{state.inst().mkp(), state.mkp()};
  const auto& p = c.d.profits;
  auto exponent = [&] { return genome.param("profit_exponent"); };
  std::optional<OperationRecord> op;
  switch (genome.family) {
    case Family::GreedyByProfit:
      op = greedy_add(c, [&](int i) { return p[i]; });
      break;
    case Family::GreedyByWeight:
      op = greedy_add(c, [&](int i) { return -total_weight(c, i); });
      break;
    case Family::GreedyByDensity: {
      const double e = exponent();
      op = greedy_add(c, [&](int i) {
        return std::pow(p[i], e) / (total_weight(c, i) + kWeightEpsilon);
      });
      break;
    }
    case Family::GreedyByProfitWeightRatio: {
      const double e = exponent();
      op = greedy_add(c, [&](int i) {
        double normalized = 0;
        for (int r = 0; r < c.d.m; ++r) {
          if (c.d.capacities[r] > 0) normalized += c.d.w(r, i) / c.d.capacities[r];
        }
        return std::pow(p[i], e) / (normalized + kWeightEpsilon);
      });
      break;
    }
    case Family::GreedyByResourceBalance: {
      const double e = exponent();
      op = greedy_add(c, [&](int i) {
        double tightest = 0;
        for (int r = 0; r < c.d.m; ++r) {
          const double res = c.sol.residual[r];
          if (c.d.w(r, i) > 0) {
            tightest = std::max(tightest, c.d.w(r, i) / std::max(res, kWeightEpsilon));
          }
        }
        return std::pow(p[i], e) / (tightest + kWeightEpsilon);
      });
      break;
    }
    case Family::GreedyByLeastRemainingCapacity:
      op = greedy_add(c, [&](int i) {
        double left = 0;
        for (int r = 0; r < c.d.m; ++r) {
          if (c.d.capacities[r] > 0) {
            left += (c.sol.residual[r] - c.d.w(r, i)) / c.d.capacities[r];
          }
        }
        return -left;
      });
      break;
    case Family::SingleSwap: return find_swap(c, true);
    case Family::KFlip: return k_flip(c, static_cast<int>(genome.param("k")));
    case Family::BlockFlip:
      return block_flip(c, static_cast<int>(genome.param("block_length")));
    case Family::TwoOptMkp: return find_swap(c, false);
    case Family::GreedyImprovement:
      if (auto add = greedy_add(c, [&](int i) { return p[i]; })) return add;
      return find_swap(c, false);
    default:
      throw Error(Errc::HeuristicFault, genome.id + " is not an MKP heuristic");
  }
  if (!op && genome.flag("final_swap_pass")) return find_swap(c, false);
  return op;
}

}  // namespace hh::heuristics
