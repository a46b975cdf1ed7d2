#include "hh/engine.hpp"

#include "hh/envs.hpp"

namespace hh {

namespace {

void apply_or_fault(ProblemState& state, const HeuristicGenome& genome,
                    const OperationRecord& op) {
  try {
    apply_operation_inplace(state, op);
  } catch (const Error& e) {
    if (e.code() != Errc::InvalidOperation) throw;
    throw Error(Errc::HeuristicFault,
                genome.id + " produced " + to_string(op) + ": " + e.what());
  }
}

double rollout_impl(const ProblemState& start,
                    const std::vector<HeuristicGenome>& pool,
                    std::uint64_t seed, Trajectory* out) {
  if (pool.empty()) throw Error(Errc::NoCandidates, "rollout needs a non-empty pool");
  Rng rng(seed);
  ProblemState cur = start;
  const ObjectiveSense sense = start.inst().sense();
  const int cap = step_cap(start.inst());
  std::vector<char> failed(pool.size(), 0);
  std::size_t failed_count = 0;
  std::vector<std::size_t> open;
  AlgorithmData data;
  int active = -1;
  int steps = 0;
  while (steps < cap) {
    if (active < 0) {
      if (failed_count == pool.size()) break;
      open.clear();
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!failed[i]) open.push_back(i);
      }
      active = static_cast<int>(open[rng.uniform_index(open.size())]);
      data.clear();
    }
    const HeuristicGenome& h = pool[active];
    const auto decision = heuristic_step(h, cur, data, rng);
    bool accepted = false;
    if (decision.operation) {
      const OperationRecord& op = *decision.operation;
      const bool constructive = is_constructive(cur, op);
      ProblemState next = cur;
      apply_or_fault(next, h, op);
      if (constructive || is_better(objective_value(next), objective_value(cur), sense)) {
        cur = std::move(next);
        ++steps;
        accepted = true;
        if (out) out->steps.push_back({op, out->heuristic_slot(h.id)});
      }
    }
    if (accepted) {
      if (failed_count > 0) {
        std::fill(failed.begin(), failed.end(), 0);
        failed_count = 0;
      }
    } else {
      failed[active] = 1;
      ++failed_count;
      active = -1;
    }
  }
  if (!is_complete(cur)) {
    throw Error(Errc::BudgetExceeded,
                "rollout ended with an incomplete solution after " +
                    std::to_string(steps) + " steps");
  }
  const double cost = evaluate_cost(cur.inst(), cur.solution);
  if (out) out->terminal_cost = cost;
  return cost;
}

}  // namespace

StepBurst run_heuristic_steps(const ProblemState& state,
                              const HeuristicGenome& genome, int m, Rng& rng,
                              AlgorithmData& data) {
  if (m < 1) throw Error(Errc::ConfigError, "run_heuristic_steps needs m >= 1");
  StepBurst burst{state, 0, {}};
  for (int k = 0; k < m; ++k) {
    const auto decision = heuristic_step(genome, burst.state, data, rng);
    if (!decision.operation) break;
    apply_or_fault(burst.state, genome, *decision.operation);
    burst.ops.push_back(*decision.operation);
    ++burst.applied;
  }
  return burst;
}

StepBurst run_heuristic_steps(const ProblemState& state,
                              const HeuristicGenome& genome, int m,
                              std::uint64_t seed) {
  Rng rng(seed);
  AlgorithmData data;
  return run_heuristic_steps(state, genome, m, rng, data);
}

Trajectory rollout_random(const ProblemState& state,
                          const std::vector<HeuristicGenome>& pool,
                          std::uint64_t seed) {
  Trajectory traj;
  traj.start = state;
  traj.seed = seed;
  rollout_impl(state, pool, seed, &traj);
  return traj;
}

double rollout_cost(const ProblemState& state,
                    const std::vector<HeuristicGenome>& pool,
                    std::uint64_t seed) {
  return rollout_impl(state, pool, seed, nullptr);
}

}  // namespace hh
