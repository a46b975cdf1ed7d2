#include <exception>
#include <fstream>

#include <json.hpp>

#include "hh/engine.hpp"
#include "hh/envs.hpp"
#include "hh/rewards.hpp"

namespace hh {

namespace {

using ojson = nlohmann::ordered_json;

ojson features_json(const FeatureMap& features) {
  ojson j = ojson::object();
  for (const auto& [name, value] : features) j[name] = value;
  return j;
}

std::string ask_select(Advisor* advisor, const ProblemState& state,
                       const std::vector<HeuristicGenome>& pool,
                       const DatasetConfig& cfg, int g) {
  if (!advisor) return "";
  ScriptedContext ctx;
  ctx.pool = pool;
  ctx.state = &state;
  ctx.sense = state.inst().sense();
  ctx.sample_index = g;
  AdvisorRequest req;
  req.role = AdvisorRole::Select;
  req.prompt = render_select_prompt(state, pool, cfg.selector.context_budget) +
               "\nSample " + std::to_string(g + 1) + " of " +
               std::to_string(cfg.rewards.group_size) + ".\n";
  req.context_budget = cfg.selector.context_budget;
  req.context = &ctx;
  try {
    return advisor->complete(req);
  } catch (const Error& e) {
    if (e.code() == Errc::TranscriptMiss) throw;
    return "";
  }
}

}  // namespace

std::string sample_to_json(const SelectionSample& sample) {
  ojson j;
  j["instance"] = sample.instance;
  j["decision"] = sample.decision;
  j["kind"] = to_string(sample.kind);
  j["features"] = features_json(sample.features);
  ojson scores = ojson::array();
  for (const auto& [id, q] : sample.scores) scores.push_back({{"heuristic", id}, {"q_hat", q}});
  j["pool_scores"] = scores;
  j["chosen"] = sample.chosen;
  ojson proposals = ojson::array();
  ojson rewards = ojson::array();
  ojson advantages = ojson::array();
  for (const auto& p : sample.proposals) {
    proposals.push_back({{"heuristic", p.heuristic},
                         {"predicted", features_json(p.predicted)},
                         {"reply", p.raw_reply},
                         {"rank", p.rank},
                         {"por", p.por},
                         {"cpr", p.cpr},
                         {"format", p.base}});
    rewards.push_back(p.total);
    advantages.push_back(p.advantage);
  }
  j["proposals"] = proposals;
  j["rewards"] = rewards;
  j["advantages"] = advantages;
  return j.dump();
}

std::string dataset_header_json(const DatasetConfig& cfg,
                                const std::vector<HeuristicGenome>& pool,
                                ProblemKind kind) {
  ojson j;
  j["schema"] = "hh-offline-v1";
  j["problem"] = to_string(kind);
  ojson ids = ojson::array();
  for (const auto& g : pool) ids.push_back(g.id);
  j["pool"] = ids;
  j["m_steps"] = cfg.selector.m_steps;
  j["rollouts_per_candidate"] = cfg.selector.rollouts_per_candidate;
  j["common_random_numbers"] = cfg.selector.common_random_numbers;
  j["greedy_mix"] = cfg.greedy_mix;
  j["seed"] = cfg.seed;
  const Thresholds t = resolve_thresholds(cfg.rewards, static_cast<int>(pool.size()));
  j["rewards"] = {{"n_pos", t.n_pos},
                  {"n_neg", t.n_neg},
                  {"r_p", cfg.rewards.r_p},
                  {"r_n", cfg.rewards.r_n},
                  {"r_l", cfg.rewards.r_l},
                  {"r_f", cfg.rewards.r_f},
                  {"lambda_por", cfg.rewards.lambda_por},
                  {"lambda_cpr", cfg.rewards.lambda_cpr},
                  {"lambda_base", cfg.rewards.lambda_base},
                  {"group_size", cfg.rewards.group_size}};
  return j.dump();
}

std::vector<SelectionSample> collect_instance_samples(
    const InstancePtr& instance, const std::vector<HeuristicGenome>& pool,
    const DatasetConfig& cfg, Advisor* advisor, std::uint64_t seed) {
  if (!(cfg.greedy_mix >= 0 && cfg.greedy_mix <= 1)) {
    throw Error(Errc::ConfigError, "greedy mix must lie in [0, 1]");
  }
  if (pool.empty()) throw Error(Errc::NoCandidates, "empty heuristic pool");
  resolve_thresholds(cfg.rewards, static_cast<int>(pool.size()));
  const ObjectiveSense sense = instance->sense();
  const int cap = step_cap(*instance);
  const int m = cfg.selector.m_steps;
  const int max_decisions =
      cfg.selector.max_decisions > 0 ? cfg.selector.max_decisions : (cap + m - 1) / m;
  Rng kind_rng(derive_seed(seed, 5, 0));
  ProblemState state = initial_state(instance);
  std::vector<SelectionSample> out;

  for (int d = 0; d < max_decisions; ++d) {
    const std::uint64_t dseed = derive_seed(seed, 6, static_cast<std::uint64_t>(d));
    const std::uint64_t burst_seed = derive_seed(dseed, 3, 0);
    const auto usable = usable_heuristics(state, pool, burst_seed);
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (usable[i]) open.push_back(i);
    }
    if (open.empty()) {
      if (is_complete(state)) break;
      throw Error(Errc::BudgetExceeded, "no heuristic can extend the partial solution");
    }

    SelectionSample sample;
    sample.instance = instance->name;
    sample.decision = d;
    sample.features = extract_features(state);
    std::vector<std::size_t> all(pool.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto estimates = evaluate_candidates(state, all, pool, cfg.selector, dseed);
    for (const auto& e : estimates) sample.scores.emplace_back(e.heuristic_id, e.q_hat);

    for (int g = 0; g < cfg.rewards.group_size; ++g) {
      Proposal p;
      p.raw_reply = ask_select(advisor, state, pool, cfg, g);
      sample.proposals.push_back(std::move(p));
    }
    score_proposals(sample, pool, sense, cfg.rewards);

    std::size_t next = open.front();
    if (kind_rng.bernoulli(cfg.greedy_mix)) {
      sample.kind = TrajectoryKind::Greedy;
      for (std::size_t i : open) {
        if (is_better(estimates[i].q_hat, estimates[next].q_hat, sense)) next = i;
      }
    } else {
      sample.kind = TrajectoryKind::Stochastic;
      next = open[kind_rng.uniform_index(open.size())];
    }
    sample.chosen = pool[next].id;
    state = run_heuristic_steps(state, pool[next], m, burst_seed).state;
    out.push_back(std::move(sample));
  }
  if (!is_complete(state)) {
    throw Error(Errc::BudgetExceeded, "decision budget left " + instance->name + " incomplete");
  }
  return out;
}

DatasetSummary collect_offline_dataset(const std::vector<InstancePtr>& instances,
                                       const std::vector<HeuristicGenome>& pool,
                                       const DatasetConfig& cfg, Advisor* advisor,
                                       const std::string& path) {
  if (instances.empty()) throw Error(Errc::ConfigError, "no instances to collect from");
  std::vector<std::vector<std::string>> shards(instances.size());
  std::vector<std::exception_ptr> errors(instances.size());
  const auto n = static_cast<std::int64_t>(instances.size());
#pragma omp parallel for schedule(dynamic, 1) if (cfg.selector.parallel)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const auto samples = collect_instance_samples(
          instances[k], pool, cfg, advisor, derive_seed(cfg.seed, 7, k));
      for (const auto& s : samples) shards[k].push_back(sample_to_json(s));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::ofstream out(path);
  if (!out) throw Error(Errc::ConfigError, "cannot write dataset " + path);
  out << dataset_header_json(cfg, pool, instances.front()->kind) << "\n";
  DatasetSummary summary;
  for (const auto& shard : shards) {
    for (const auto& line : shard) out << line << "\n";
    summary.records += shard.size();
    summary.decisions_per_instance.push_back(shard.size());
  }
  return summary;
}

}  // namespace hh
