#pragma once

// Concrete TSP, MKP and MaxCut environments.

#include <cstddef>
#include <string>
#include <vector>

#include "hh/core.hpp"
#include "hh/rng.hpp"

namespace hh {

struct FeatureSpec {
  std::string name;
  bool is_static = false;
};

/// Ordered feature names for a problem kind, static features first.
const std::vector<FeatureSpec>& feature_schema(ProblemKind kind);

ProblemState initial_state(InstancePtr instance);

/// Objective of a complete, feasible solution. Throws IncompleteSolution or
/// InfeasibleSolution otherwise.
double evaluate_cost(const ProblemInstance& instance, const Solution& solution);

/// Static + dynamic features in schema order. Empty-set aggregates are 0.
FeatureMap extract_features(const ProblemState& state);

/// Recomputes the cached parts of a solution (visited set, residual
/// capacities, cut value) from scratch.
Solution recompute_caches(const ProblemInstance& instance,
                          const Solution& solution);

/// Up to `cap` operations of the same kind as `op` that are applicable at
/// `state`, excluding `op`. Sampled uniformly without replacement when the
/// full set is larger than `cap`. Throws NoAlternative when empty.
std::vector<OperationRecord> enumerate_alternatives(const ProblemState& state,
                                                    const OperationRecord& op,
                                                    std::size_t cap, Rng& rng);

/// Every applicable operation of `kind` at `state`, in canonical order.
std::vector<OperationRecord> applicable_operations(const ProblemState& state,
                                                   OpKind kind);

struct ValidationReport {
  bool valid = true;
  std::vector<std::string> violations;
};

/// Lists every violated hard constraint; completeness is reported too.
ValidationReport validate_solution(const ProblemInstance& instance,
                                   const Solution& solution);

/// Renders features as `name=value` lines with 4 significant digits,
/// truncated to at most `budget` characters at a line boundary.
std::string render_features(const FeatureMap& features,
                            std::size_t budget = 1000);

/// 4-significant-digit rendering shared by prompts and perception rewards.
std::string format_sig4(double value);

}  // namespace hh
