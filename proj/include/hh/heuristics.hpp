#pragma once

// Parameterized heuristic catalog. Every heuristic maps a problem state to a
// single operation (or to "no operation") through heuristic_step.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hh/core.hpp"
#include "hh/rng.hpp"

namespace hh {

enum class Family {
  // TSP
  NearestNeighbor,
  CheapestInsertion,
  FarthestInsertion,
  NearestInsertion,
  RandomPairwiseInsertion,
  GreedyEdge,
  Grasp,
  InsertionGeneric,
  TwoOpt,
  ThreeOpt,
  // MKP
  GreedyByProfit,
  GreedyByWeight,
  GreedyByDensity,
  GreedyByProfitWeightRatio,
  GreedyByResourceBalance,
  GreedyByLeastRemainingCapacity,
  SingleSwap,
  KFlip,
  BlockFlip,
  TwoOptMkp,
  GreedyImprovement,
  // MaxCut
  MostWeightNeighbors,
  HighestWeightEdge,
  BalancedCut,
  HighestDeltaNode,
  HighestDeltaEdge,
  GreedySwap,
  MultiSwap2,
  SimulatedAnnealing,
};

struct ParamSpec {
  std::string name;
  double default_value = 0;
  double lo = 0;
  double hi = 0;
  bool integral = false;
};

struct FlagSpec {
  std::string name;
  bool default_value = false;
};

struct FamilyInfo {
  Family family;
  std::string name;
  ProblemKind problem;
  bool constructive;
  std::vector<ParamSpec> params;  // the evolvable edit surface
  std::vector<FlagSpec> flags;
  std::string description;
  int evaluation_cost_rank;  // relative cost of one call, used by static_topk
};

const FamilyInfo& family_info(Family family);
const std::vector<Family>& families_for(ProblemKind kind);
std::optional<Family> family_from_name(std::string_view name);

struct HeuristicGenome {
  std::string id;  // family name + '_' + 4 hex digits
  Family family = Family::NearestNeighbor;
  std::map<std::string, double> params;
  std::map<std::string, bool> flags;
  std::vector<std::string> lineage;

  double param(const std::string& name) const;
  bool flag(const std::string& name) const;
  const FamilyInfo& info() const { return family_info(family); }
  /// Same family, params and flags (ids and lineage ignored).
  bool same_behavior(const HeuristicGenome& other) const;
};

/// Genome with default parameters and a content-derived id.
HeuristicGenome make_genome(Family family);

/// Recomputes the id suffix from (family, params, flags).
std::string genome_id(const HeuristicGenome& genome);

/// Scratch space persisted across consecutive calls of the same heuristic.
/// Callers clear it whenever a different heuristic takes over.
struct AlgorithmData {
  std::unordered_map<std::string, std::vector<double>> values;
  void clear() { values.clear(); }
  bool empty() const { return values.empty(); }
};

struct HeuristicDecision {
  std::optional<OperationRecord> operation;  // nullopt = NoOperation
};

/// H(z). Deterministic given (genome, state, data, rng state). Throws
/// HeuristicFault when the genome targets another problem kind.
HeuristicDecision heuristic_step(const HeuristicGenome& genome,
                                 const ProblemState& state, AlgorithmData& data,
                                 Rng& rng);

/// Catalog genomes with default params, in catalog order.
std::vector<HeuristicGenome> default_pool(ProblemKind kind);

struct ParamEdit {
  std::string target;  // param or flag name
  double value = 0;    // flags: non-zero means true
  friend bool operator==(const ParamEdit&, const ParamEdit&) = default;
};

/// One evolution strategy: edits for exactly one family.
struct StrategyEdit {
  std::string strategy_id;
  Family target = Family::NearestNeighbor;
  std::vector<ParamEdit> edits;
  std::string rationale;
};

/// Applies the edits, clamping params to their bounds. Clamps and the
/// strategy id are appended to the lineage. Throws UnknownTarget.
HeuristicGenome mutate_genome(const HeuristicGenome& genome,
                              const StrategyEdit& edit);

/// Whether `name` is a declared param or flag of the family.
bool is_edit_target(Family family, std::string_view name);

/// `key = value` text, one entry per line.
std::string genome_to_text(const HeuristicGenome& genome);
HeuristicGenome genome_from_text(std::string_view text);

/// Canonical JSON (sorted keys) for run records.
std::string genome_to_json(const HeuristicGenome& genome);

}  // namespace hh
