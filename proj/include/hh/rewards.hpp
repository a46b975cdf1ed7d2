#pragma once

// Selection rewards (POR, CPR, NRR, format), group-relative advantages and
// the offline selection dataset.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hh/advisor.hpp"
#include "hh/core.hpp"
#include "hh/heuristics.hpp"
#include "hh/selector.hpp"

namespace hh {

using HeuristicScores = std::vector<std::pair<std::string, double>>;

struct RewardConfig {
  std::optional<int> n_pos;  // default ceil(0.3 n)
  std::optional<int> n_neg;  // default n
  double r_p = 1;
  double r_n = 1;
  double r_l = 2;
  double r_f = 1;
  /// Per-feature (R+, R-); features not listed use (1, 1).
  std::map<std::string, std::pair<double, double>> cpr_rewards;
  /// Numeric match tolerance (relative). Unset: equal after 4-significant-
  /// digit rounding.
  std::optional<double> cpr_rel_tol;
  double lambda_por = 1;
  double lambda_cpr = 1;
  double lambda_base = 1;
  int group_size = 12;
};

struct Thresholds {
  int n_pos = 1;
  int n_neg = 1;
};

/// Resolves the defaults for a pool of n heuristics. Throws ConfigError
/// unless 1 <= n_pos < n_neg <= n and the magnitudes are positive.
Thresholds resolve_thresholds(const RewardConfig& cfg, int n);

/// 1-based rank of `chosen` among the scores sorted best first; ties keep
/// pool order. Unknown names rank n + 1.
int rank_heuristic(const std::string& chosen, const HeuristicScores& scores,
                   ObjectiveSense sense);

double por_reward(int rank, int n, const RewardConfig& cfg);

/// Min-max normalization to [-1, 1] with the best score at 1; 0 when all
/// scores are equal.
double nrr_reward(double score, const std::vector<double>& scores,
                  ObjectiveSense sense = ObjectiveSense::Maximize);

/// Sum over the features of z of +R_i on a match and -R_i on a mismatch.
/// Features missing from `predicted` count as mismatches.
double cpr_reward(const FeatureMap& z, const FeatureMap& predicted,
                  const RewardConfig& cfg);

double format_reward(const std::string& raw_reply,
                     const std::vector<HeuristicGenome>& pool,
                     const RewardConfig& cfg);

double total_reward(double por, double cpr, double base, const RewardConfig& cfg);

/// A_g = R_g - mean(R). Throws GroupTooSmall for fewer than two rewards.
std::vector<double> group_advantages(const std::vector<double>& rewards);

enum class TrajectoryKind { Greedy, Stochastic };
const char* to_string(TrajectoryKind kind);

struct Proposal {
  std::string raw_reply;
  std::string heuristic;  // as parsed; empty when unparseable
  FeatureMap predicted;
  int rank = 0;
  double por = 0;
  double cpr = 0;
  double base = 0;
  double total = 0;
  double advantage = 0;
};

struct SelectionSample {
  std::string instance;
  int decision = 0;
  FeatureMap features;
  HeuristicScores scores;  // every pool heuristic, pool order
  std::string chosen;      // heuristic used to advance the state
  TrajectoryKind kind = TrajectoryKind::Greedy;
  std::vector<Proposal> proposals;
};

/// Scores G advisor proposals against the sample's pool scores.
void score_proposals(SelectionSample& sample, const std::vector<HeuristicGenome>& pool,
                     ObjectiveSense sense, const RewardConfig& cfg);

std::string sample_to_json(const SelectionSample& sample);

struct DatasetConfig {
  SelectorConfig selector;
  RewardConfig rewards;
  double greedy_mix = 1.0;  // fraction of decisions advanced greedily
  std::uint64_t seed = 0;
};

struct DatasetSummary {
  std::size_t records = 0;
  std::vector<std::size_t> decisions_per_instance;
};

std::string dataset_header_json(const DatasetConfig& cfg,
                                const std::vector<HeuristicGenome>& pool,
                                ProblemKind kind);

/// Samples for one instance, in decision order.
std::vector<SelectionSample> collect_instance_samples(
    const InstancePtr& instance, const std::vector<HeuristicGenome>& pool,
    const DatasetConfig& cfg, Advisor* advisor, std::uint64_t seed);

/// Writes the header line then one sample per line. Instances run in
/// parallel; output order follows the instance list.
DatasetSummary collect_offline_dataset(const std::vector<InstancePtr>& instances,
                                       const std::vector<HeuristicGenome>& pool,
                                       const DatasetConfig& cfg, Advisor* advisor,
                                       const std::string& path);

}  // namespace hh
