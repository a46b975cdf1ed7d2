#include <algorithm>
#include <cmath>

#include "detail.hpp"

namespace hh::detail {

namespace {

// Added to item weights before dividing by them.
constexpr double kWeightEpsilon = 1e-6;

bool fits(const MkpData& data, const std::vector<double>& residual, int item) {
  for (int r = 0; r < data.m; ++r) {
    if (data.w(r, item) > residual[r] + kCapacityEps) return false;
  }
  return true;
}

double item_weight(const MkpData& data, int item) {
  double total = 0;
  for (int r = 0; r < data.m; ++r) total += data.w(r, item);
  return total;
}

}  // namespace

FeatureMap mkp_static_features(const MkpData& data) {
  MomentAccumulator profit;
  for (double p : data.profits) profit.add(p);
  MomentAccumulator all_weights;
  double mean_row_variance = 0;
  for (int r = 0; r < data.m; ++r) {
    MomentAccumulator row;
    for (int i = 0; i < data.n; ++i) {
      row.add(data.w(r, i));
      all_weights.add(data.w(r, i));
    }
    mean_row_variance += row.result().variance;
  }
  mean_row_variance /= data.m;
  double total_weight = 0;
  for (double w : data.weights) total_weight += w;
  double total_capacity = 0;
  for (double c : data.capacities) total_capacity += c;

  double min_item_weight = item_weight(data, 0);
  double ratio_sum = 0;
  for (int i = 0; i < data.n; ++i) {
    const double w = item_weight(data, i);
    min_item_weight = std::min(min_item_weight, w);
    ratio_sum += data.profits[i] / (w + kWeightEpsilon);
  }
  const Moments p = profit.result();
  return {
      {"average_profit", p.mean},
      {"profit_variance", p.variance},
      {"average_weight_per_resource", all_weights.result().mean},
      {"weight_variance_per_resource", mean_row_variance},
      {"total_weights", total_weight},
      {"capacity_to_weight_ratio",
       total_weight > 0 ? total_capacity / total_weight : 0.0},
      // Smallest per-item weight sum after the epsilon guard used in ratios.
      {"weights_with_epsilon", min_item_weight + kWeightEpsilon},
      {"profit_to_weight_ratio", ratio_sum / data.n},
  };
}

double mkp_profit(const MkpData& data, const std::vector<char>& included) {
  double total = 0;
  for (int i = 0; i < data.n; ++i) {
    if (included[i]) total += data.profits[i];
  }
  return total;
}

bool mkp_applicable(const MkpData& data, const MkpSolution& sol,
                    const OperationRecord& op) {
  const auto& a = op.args;
  auto valid_item = [&](int i) { return i >= 0 && i < data.n; };
  switch (op.kind) {
    case OpKind::Add:
      return valid_item(a[0]) && !sol.included[a[0]] &&
             fits(data, sol.residual, a[0]);
    case OpKind::Remove:
      return valid_item(a[0]) && sol.included[a[0]];
    case OpKind::Toggle:
      if (!valid_item(a[0])) return false;
      return sol.included[a[0]] || fits(data, sol.residual, a[0]);
    case OpKind::SwapItem: {
      if (!valid_item(a[0]) || !valid_item(a[1])) return false;
      if (!sol.included[a[0]] || sol.included[a[1]]) return false;
      for (int r = 0; r < data.m; ++r) {
        if (data.w(r, a[1]) >
            sol.residual[r] + data.w(r, a[0]) + kCapacityEps) {
          return false;
        }
      }
      return true;
    }
    case OpKind::FlipBlock: {
      const int start = a[0], count = a[1];
      if (count < 1 || start < 0 || start + count > data.n) return false;
      for (int r = 0; r < data.m; ++r) {
        double res = sol.residual[r];
        for (int i = start; i < start + count; ++i) {
          res += sol.included[i] ? data.w(r, i) : -data.w(r, i);
        }
        if (res < -kCapacityEps) return false;
      }
      return true;
    }
    default:
      return false;
  }
}

namespace {

void set_item(const MkpData& data, MkpSolution& sol, int item, bool in) {
  if (static_cast<bool>(sol.included[item]) == in) return;
  sol.included[item] = in ? 1 : 0;
  for (int r = 0; r < data.m; ++r) {
    sol.residual[r] += in ? -data.w(r, item) : data.w(r, item);
  }
}

}  // namespace

void mkp_apply(const MkpData& data, MkpSolution& sol,
               const OperationRecord& op) {
  const auto& a = op.args;
  switch (op.kind) {
    case OpKind::Add: set_item(data, sol, a[0], true); break;
    case OpKind::Remove: set_item(data, sol, a[0], false); break;
    case OpKind::Toggle: set_item(data, sol, a[0], !sol.included[a[0]]); break;
    case OpKind::SwapItem:
      set_item(data, sol, a[0], false);
      set_item(data, sol, a[1], true);
      break;
    case OpKind::FlipBlock:
      // Removals first so the intermediate residual stays meaningful.
      for (int i = a[0]; i < a[0] + a[1]; ++i) {
        if (sol.included[i]) set_item(data, sol, i, false);
        else sol.included[i] = 2;  // mark for addition
      }
      for (int i = a[0]; i < a[0] + a[1]; ++i) {
        if (sol.included[i] == 2) {
          sol.included[i] = 0;
          set_item(data, sol, i, true);
        }
      }
      break;
    default:
      break;
  }
}

FeatureMap mkp_dynamic_features(const MkpData& data, const MkpSolution& sol) {
  int included = 0;
  int excluded_fitting = 0;
  double included_profit = 0;
  double total_profit = 0;
  for (int i = 0; i < data.n; ++i) {
    total_profit += data.profits[i];
    if (sol.included[i]) {
      ++included;
      included_profit += data.profits[i];
    } else if (fits(data, sol.residual, i)) {
      ++excluded_fitting;
    }
  }
  const int excluded = data.n - included;
  MomentAccumulator residual;
  double utilized = 0;
  for (int r = 0; r < data.m; ++r) {
    residual.add(sol.residual[r]);
    const double cap = data.capacities[r];
    if (cap > 0) utilized += (cap - sol.residual[r]) / cap;
  }
  const Moments res = residual.result();
  return {
      {"solution_density", static_cast<double>(included) / data.n},
      {"average_remaining_capacity", res.mean},
      {"remaining_capacity_variance", res.variance},
      {"total_remaining_items", static_cast<double>(excluded)},
      {"feasibility_ratio",
       excluded > 0 ? static_cast<double>(excluded_fitting) / excluded : 0.0},
      {"utilized_capacity_ratio", utilized / data.m},
      {"included_items", static_cast<double>(included)},
      {"included_profits", included_profit},
      {"item_profitability_in_solution",
       total_profit != 0 ? included_profit / total_profit : 0.0},
  };
}

void mkp_validate(const MkpData& data, const MkpSolution& sol,
                  std::vector<std::string>& violations) {
  if (sol.included.size() != static_cast<std::size_t>(data.n) ||
      sol.residual.size() != static_cast<std::size_t>(data.m)) {
    violations.push_back("solution has wrong dimensions");
    return;
  }
  for (int r = 0; r < data.m; ++r) {
    double used = 0;
    for (int i = 0; i < data.n; ++i) {
      if (sol.included[i]) used += data.w(r, i);
    }
    const double expected = data.capacities[r] - used;
    if (expected < -kCapacityEps || sol.residual[r] < -kCapacityEps) {
      violations.push_back("capacity exceeded on resource " +
                           std::to_string(r));
    }
    if (std::abs(expected - sol.residual[r]) >
        1e-9 * std::max(1.0, std::abs(data.capacities[r]))) {
      violations.push_back("residual capacity inconsistent on resource " +
                           std::to_string(r));
    }
  }
}

}  // namespace hh::detail
