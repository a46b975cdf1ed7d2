#pragma once

// Heuristic application bursts and random-heuristic rollouts.

#include <cstdint>
#include <vector>

#include "hh/core.hpp"
#include "hh/heuristics.hpp"
#include "hh/rng.hpp"

namespace hh {

struct StepBurst {
  ProblemState state;
  int applied = 0;
  std::vector<OperationRecord> ops;
};

/// T^m: applies the genome up to m times, stopping early on NoOperation.
/// An inapplicable operation from the genome raises HeuristicFault.
/// `data` persists across the burst; pass the caller's scratch to keep it
/// across bursts of the same heuristic.
StepBurst run_heuristic_steps(const ProblemState& state,
                              const HeuristicGenome& genome, int m, Rng& rng,
                              AlgorithmData& data);
StepBurst run_heuristic_steps(const ProblemState& state,
                              const HeuristicGenome& genome, int m,
                              std::uint64_t seed);

/// Random-heuristic completion. The drawn heuristic keeps running while its
/// operations are accepted: constructive operations always, improving ones
/// only when strictly better. A rejected or missing operation marks the
/// heuristic failed and a new one is drawn uniformly among the rest; any
/// acceptance clears the failed set. Stops when every heuristic has failed
/// in a row or the step cap is hit. Throws BudgetExceeded when that leaves
/// the solution incomplete.
Trajectory rollout_random(const ProblemState& state,
                          const std::vector<HeuristicGenome>& pool,
                          std::uint64_t seed);

/// Terminal cost of rollout_random without keeping the trajectory.
double rollout_cost(const ProblemState& state,
                    const std::vector<HeuristicGenome>& pool,
                    std::uint64_t seed);

}  // namespace hh
