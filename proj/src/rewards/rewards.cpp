#include <algorithm>
#include <cmath>
#include <numeric>

#include "hh/envs.hpp"
#include "hh/rewards.hpp"

namespace hh {

Thresholds resolve_thresholds(const RewardConfig& cfg, int n) {
  Thresholds t;
  t.n_pos = cfg.n_pos.value_or(static_cast<int>(std::ceil(0.3 * n)));
  t.n_neg = cfg.n_neg.value_or(n);
  if (!(1 <= t.n_pos && t.n_pos < t.n_neg && t.n_neg <= n)) {
    throw Error(Errc::ConfigError,
                "reward thresholds need 1 <= n_pos < n_neg <= n (n_pos=" +
                    std::to_string(t.n_pos) + ", n_neg=" + std::to_string(t.n_neg) +
                    ", n=" + std::to_string(n) + ")");
  }
  if (!(cfg.r_p > 0 && cfg.r_n > 0 && cfg.r_l > 0 && cfg.r_f > 0)) {
    throw Error(Errc::ConfigError, "reward magnitudes must be positive");
  }
  return t;
}

int rank_heuristic(const std::string& chosen, const HeuristicScores& scores,
                   ObjectiveSense sense) {
  const auto n = static_cast<int>(scores.size());
  const auto it = std::find_if(scores.begin(), scores.end(),
                               [&](const auto& s) { return s.first == chosen; });
  if (it == scores.end()) return n + 1;
  const auto pos = it - scores.begin();
  int rank = 1;
  for (int i = 0; i < n; ++i) {
    const double other = scores[static_cast<std::size_t>(i)].second;
    if (is_better(other, it->second, sense) || (other == it->second && i < pos)) ++rank;
  }
  return rank;
}

double por_reward(int rank, int n, const RewardConfig& cfg) {
  if (rank < 1) throw Error(Errc::ConfigError, "rank must be >= 1");
  const Thresholds t = resolve_thresholds(cfg, n);
  if (rank <= t.n_pos) {
    return cfg.r_p * (1.0 - static_cast<double>(rank - 1) / t.n_pos);
  }
  if (rank <= t.n_neg) {
    return -cfg.r_n * static_cast<double>(rank - t.n_pos) / (t.n_neg - t.n_pos);
  }
  return -cfg.r_l;
}

double nrr_reward(double score, const std::vector<double>& scores, ObjectiveSense sense) {
  if (scores.empty()) return 0;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*hi == *lo) return 0;
  const double span = *hi - *lo;
  const double frac = sense == ObjectiveSense::Maximize ? (score - *lo) / span
                                                        : (*hi - score) / span;
  return 2 * frac - 1;
}

double cpr_reward(const FeatureMap& z, const FeatureMap& predicted,
                  const RewardConfig& cfg) {
  double total = 0;
  for (const auto& [name, value] : z) {
    const auto guess = feature_value(predicted, name);
    bool match = false;
    if (guess) {
      if (cfg.cpr_rel_tol) {
        match = std::abs(*guess - value) <= *cfg.cpr_rel_tol * std::max(std::abs(value), 1e-12);
      } else {
        match = format_sig4(*guess) == format_sig4(value);
      }
    }
    double plus = 1, minus = 1;
    if (const auto it = cfg.cpr_rewards.find(name); it != cfg.cpr_rewards.end()) {
      plus = it->second.first;
      minus = it->second.second;
    }
    total += match ? plus : -minus;
  }
  return total;
}

double format_reward(const std::string& raw_reply,
                     const std::vector<HeuristicGenome>& pool,
                     const RewardConfig& cfg) {
  return parse_select_reply(raw_reply, pool).parse_ok ? cfg.r_f : -cfg.r_f;
}

double total_reward(double por, double cpr, double base, const RewardConfig& cfg) {
  return cfg.lambda_por * por + cfg.lambda_cpr * cpr + cfg.lambda_base * base;
}

std::vector<double> group_advantages(const std::vector<double>& rewards) {
  if (rewards.size() < 2) {
    throw Error(Errc::GroupTooSmall, "group-relative advantages need at least two rewards");
  }
  const double mean =
      std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back(r - mean);
  return out;
}

const char* to_string(TrajectoryKind kind) {
  return kind == TrajectoryKind::Greedy ? "greedy" : "stochastic";
}

void score_proposals(SelectionSample& sample, const std::vector<HeuristicGenome>& pool,
                     ObjectiveSense sense, const RewardConfig& cfg) {
  const int n = static_cast<int>(sample.scores.size());
  std::vector<double> totals;
  for (auto& p : sample.proposals) {
    const auto parsed = parse_select_reply(p.raw_reply, pool);
    p.heuristic = parsed.has_name ? parsed.heuristic : "";
    p.predicted = parsed.predicted;
    p.rank = rank_heuristic(p.heuristic, sample.scores, sense);
    p.por = por_reward(p.rank, n, cfg);
    p.cpr = cpr_reward(sample.features, p.predicted, cfg);
    p.base = parsed.parse_ok ? cfg.r_f : -cfg.r_f;
    p.total = total_reward(p.por, p.cpr, p.base, cfg);
    totals.push_back(p.total);
  }
  if (totals.size() >= 2) {
    const auto adv = group_advantages(totals);
    for (std::size_t g = 0; g < adv.size(); ++g) sample.proposals[g].advantage = adv[g];
  }
}

}  // namespace hh
