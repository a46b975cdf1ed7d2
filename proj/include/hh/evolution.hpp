#pragma once

// Heuristic evolution: basic and contrastive solutions, critical operations,
// advisor strategies and gated refinement.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hh/advisor.hpp"
#include "hh/core.hpp"
#include "hh/heuristics.hpp"

namespace hh {

struct EvolutionConfig {
  int max_perturbation_trials = 1000;  // P
  double perturbation_ratio = 0.1;     // |K| / n
  int max_refinement_iterations = 5;   // I_max
  int parse_retries = 3;
  bool random_bootstrap = false;       // sample the bootstrap constructive
  bool parallel = true;
  std::size_t context_budget = 1000;
  DecodingParams decoding;
  std::uint64_t seed = 0;
};

/// Constructive heuristic that completes a solution before an improvement
/// seed runs.
Family bootstrap_family(ProblemKind kind);

/// Runs the seed heuristic (after its bootstrap for improvement seeds) until
/// it returns NoOperation or the step cap. Throws BudgetExceeded when the
/// result is incomplete.
Trajectory generate_basic(const HeuristicGenome& seed_genome, const InstancePtr& instance,
                          const EvolutionConfig& cfg, std::uint64_t seed);

/// Completes a trajectory prefix with the seed pipeline from `state`.
Trajectory reroll(const Trajectory& prefix, const ProblemState& state,
                  const HeuristicGenome& seed_genome, const EvolutionConfig& cfg,
                  std::uint64_t seed);

struct Mutation {
  std::size_t k = 0;
  ProblemState z;
  OperationRecord original;
  OperationRecord replacement;
};

struct ContrastiveRecord {
  Trajectory perturbed;
  std::vector<Mutation> mutations;
  double cost_delta = 0;  // sense-adjusted, positive
  int trial = 0;          // 0-based index of the successful trial
  std::uint64_t trial_seed = 0;
};

/// Number of mutated indices for a trajectory of n operations.
std::size_t perturbation_count(std::size_t n, double ratio);

/// Outcome of one perturbation trial; nullopt when it is not strictly better.
std::optional<ContrastiveRecord> perturbation_trial(const Trajectory& basic,
                                                    const HeuristicGenome& seed_genome,
                                                    const EvolutionConfig& cfg,
                                                    std::uint64_t trial_seed);

/// Up to P trials; the lowest-index strictly better trial wins. Trials run
/// in fixed-size parallel batches.
std::optional<ContrastiveRecord> find_contrastive(const Trajectory& basic,
                                                  const HeuristicGenome& seed_genome,
                                                  const EvolutionConfig& cfg,
                                                  std::uint64_t seed);

/// Trial-by-trial reference for find_contrastive; same result.
std::optional<ContrastiveRecord> find_contrastive_serial(const Trajectory& basic,
                                                         const HeuristicGenome& seed_genome,
                                                         const EvolutionConfig& cfg,
                                                         std::uint64_t seed);

struct CriticalOperation {
  std::size_t k_star = 0;
  ProblemState z;
  OperationRecord original;
  OperationRecord replacement;
  double delta = 0;
  std::uint64_t reroll_seed = 0;
};

struct CriticalAnalysis {
  /// Per mutation: sense-adjusted C(S) - C(S^(k)); nullopt when the single
  /// replacement is inapplicable or its re-roll fails.
  std::vector<std::optional<double>> deltas;
  std::vector<std::optional<Trajectory>> singles;
  std::optional<CriticalOperation> critical;  // none when every delta <= 0
};

/// Seed for the re-roll after the single replacement at step k.
std::uint64_t single_reroll_seed(std::uint64_t seed, std::size_t k);

CriticalAnalysis identify_critical(const Trajectory& basic, const ContrastiveRecord& record,
                                   const HeuristicGenome& seed_genome,
                                   const EvolutionConfig& cfg, std::uint64_t seed);

/// Trajectory with only basic step k replaced, then re-rolled.
std::optional<Trajectory> perturb_single(const Trajectory& basic, std::size_t k,
                                         const OperationRecord& replacement,
                                         const HeuristicGenome& seed_genome,
                                         const EvolutionConfig& cfg, std::uint64_t seed);

/// Mean generate_basic cost over the validation set with fixed seeds.
double evaluate_performance(const HeuristicGenome& genome,
                            const std::vector<InstancePtr>& validation,
                            const EvolutionConfig& cfg);

using Evaluator = std::function<double(const HeuristicGenome&)>;

/// Asks the advisor for a strategy; malformed replies are retried with the
/// parse error appended. Throws AdvisorParseError when retries run out.
StrategyEdit extract_strategy(const HeuristicGenome& seed_genome,
                              const CriticalOperation& crit, Advisor& advisor,
                              const EvolutionConfig& cfg, const Evaluator& evaluate,
                              ObjectiveSense sense);

/// One refinement proposal H_{i+1} from (H_i, strategy, p_i).
HeuristicGenome refine_genome(const HeuristicGenome& current, const StrategyEdit& strategy,
                              double p, int iteration, Advisor& advisor,
                              const EvolutionConfig& cfg, const Evaluator& evaluate,
                              ObjectiveSense sense);

struct RoundRecord {
  std::string seed_id;
  std::string instance;
  double basic_cost = 0;
  bool contrastive_found = false;
  int trials = 0;
  std::vector<Mutation> mutations;
  double perturbed_cost = 0;
  std::vector<std::optional<double>> deltas;
  std::optional<std::size_t> k_star;
  std::optional<StrategyEdit> strategy;
  std::vector<double> p_series;             // accepted chain p_0 > p_1 > ...
  std::vector<std::string> accepted_ids;    // H_0, H_1, ...
  std::optional<double> rejected_p;         // last proposal that failed the gate
  std::string diagnostic;
  HeuristicGenome result;
};

std::string round_to_json(const RoundRecord& record);

/// Algorithm steps 1-5 for one (seed, instance) pair. Advisor failures end
/// the round with the seed and a diagnostic.
RoundRecord evolve_one_round(const HeuristicGenome& seed_genome, const InstancePtr& instance,
                             const std::vector<InstancePtr>& validation,
                             const EvolutionConfig& cfg, Advisor& advisor);

struct EvolutionRun {
  std::vector<HeuristicGenome> pool;
  std::vector<RoundRecord> rounds;
};

/// For each seed genome, chains evolve_one_round over the evolution set
/// `rounds` times, then adds the final genome when it differs from every
/// pool member. Seeds are kept.
EvolutionRun evolve_pool(const std::vector<HeuristicGenome>& pool,
                         const std::vector<InstancePtr>& evolution_set,
                         const std::vector<InstancePtr>& validation,
                         const EvolutionConfig& cfg, Advisor& advisor, int rounds);

}  // namespace hh
