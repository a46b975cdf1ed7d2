#pragma once

// Candidate filtering, Monte-Carlo value estimation and the solve loop.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hh/advisor.hpp"
#include "hh/core.hpp"
#include "hh/heuristics.hpp"

namespace hh {

enum class FilterMode { Advisor, Passthrough, StaticTopK };

const char* to_string(FilterMode mode);
std::optional<FilterMode> filter_mode_from_string(std::string_view text);

struct SelectorConfig {
  int m_steps = 5;                  // M
  int rollouts_per_candidate = 10;  // T; 0 = take the first candidate
  int max_decisions = 0;            // 0 = ceil(step cap / M)
  FilterMode filter_mode = FilterMode::Passthrough;
  int static_topk = 3;
  bool common_random_numbers = true;
  bool parallel = true;
  std::uint64_t master_seed = 0;
  std::size_t context_budget = 1000;
  std::optional<double> time_limit_seconds;
};

struct ValueEstimate {
  std::string heuristic_id;
  double q_hat = 0;
  std::vector<double> rollout_costs;
  std::uint64_t seed = 0;
};

/// Seed of rollout `index` for a candidate. With common random numbers every
/// candidate at a decision shares the same rollout seeds.
std::uint64_t rollout_seed(std::uint64_t seed, const std::string& heuristic_id,
                           std::size_t index, bool common_random_numbers);

/// Q-hat of one candidate: per rollout, apply h up to M times, then complete
/// with rollout_random; q_hat is the mean terminal cost in rollout order.
ValueEstimate mc_evaluate(const ProblemState& state, const HeuristicGenome& h,
                          const std::vector<HeuristicGenome>& pool,
                          const SelectorConfig& cfg, std::uint64_t seed);

/// Straight-line single-threaded version kept as the reference for the
/// parallel kernel; results are bit-identical.
ValueEstimate mc_evaluate_serial(const ProblemState& state,
                                 const HeuristicGenome& h,
                                 const std::vector<HeuristicGenome>& pool,
                                 const SelectorConfig& cfg, std::uint64_t seed);

/// All candidates at once; rollouts of every candidate share one parallel loop.
std::vector<ValueEstimate> evaluate_candidates(
    const ProblemState& state, const std::vector<std::size_t>& candidates,
    const std::vector<HeuristicGenome>& pool, const SelectorConfig& cfg,
    std::uint64_t seed);

struct FilterResult {
  std::vector<std::size_t> indices;  // into the pool, pool order
  bool fallback = false;
  std::string note;
};

FilterResult filter_candidates(const ProblemState& state,
                               const std::vector<HeuristicGenome>& pool,
                               const SelectorConfig& cfg, Advisor* advisor);

/// Index of the best estimate (min or max by sense); earliest on ties.
std::size_t argbest(const std::vector<ValueEstimate>& estimates,
                    ObjectiveSense sense);

struct Selection {
  std::size_t index = 0;  // into the pool
  std::vector<ValueEstimate> estimates;
};

/// Estimates every candidate and returns the argbest. Throws NoCandidates.
Selection select_heuristic(const ProblemState& state,
                           const std::vector<HeuristicGenome>& pool,
                           const std::vector<std::size_t>& candidates,
                           const SelectorConfig& cfg, int t_remaining,
                           std::uint64_t seed);

/// Pool heuristics that can act on the state: any operation while the
/// solution is partial, a strictly improving first operation once complete.
/// The first step uses Rng(seed) and fresh AlgorithmData.
std::vector<char> usable_heuristics(const ProblemState& state,
                                    const std::vector<HeuristicGenome>& pool,
                                    std::uint64_t seed);

struct DecisionRecord {
  int decision = 0;
  int step_index = 0;
  FeatureMap features;
  std::vector<std::string> candidates;
  std::string chosen;
  std::vector<ValueEstimate> estimates;
  bool filter_fallback = false;
  int applied = 0;
};

std::string decision_to_json(const DecisionRecord& record);

struct SolveResult {
  Trajectory trajectory;
  std::vector<DecisionRecord> decisions;
  bool timed_out = false;
};

/// Repeats filter, select and M-step execution until the solution is
/// complete and no pool heuristic can improve it, or until max_decisions.
/// Throws BudgetExceeded when that leaves the solution incomplete.
SolveResult solve_instance(const InstancePtr& instance,
                           const std::vector<HeuristicGenome>& pool,
                           const SelectorConfig& cfg, Advisor* advisor = nullptr);

}  // namespace hh
