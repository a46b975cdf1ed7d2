#pragma once

#include "hh/heuristics.hpp"

namespace hh::heuristics {

// Moves must beat this margin to count as improving, so floating-point noise
// on exact distances cannot keep a local search cycling.
inline constexpr double kImproveEps = 1e-9;

std::optional<OperationRecord> tsp_step(const HeuristicGenome& genome,
                                        const ProblemState& state,
                                        AlgorithmData& data, Rng& rng);
std::optional<OperationRecord> mkp_step(const HeuristicGenome& genome,
                                        const ProblemState& state,
                                        AlgorithmData& data, Rng& rng);
std::optional<OperationRecord> maxcut_step(const HeuristicGenome& genome,
                                           const ProblemState& state,
                                           AlgorithmData& data, Rng& rng);

}  // namespace hh::heuristics
