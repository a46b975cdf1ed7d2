#include "hh/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include <json.hpp>

#include "hh/engine.hpp"
#include "hh/envs.hpp"

namespace hh {

namespace {

constexpr std::uint64_t kCrnStream = 0x43524e;
constexpr std::uint64_t kDecisionStream = 0xdec1;

void check_config(const SelectorConfig& cfg) {
  if (cfg.m_steps < 1) throw Error(Errc::ConfigError, "m_steps must be >= 1");
  if (cfg.rollouts_per_candidate < 0) {
    throw Error(Errc::ConfigError, "rollouts_per_candidate must be >= 0");
  }
}

// Terminal cost of one rollout: up to M steps of h, then a random completion.
double one_rollout(const ProblemState& state, const HeuristicGenome& h,
                   const std::vector<HeuristicGenome>& pool, int m,
                   std::uint64_t seed) {
  const StepBurst burst = run_heuristic_steps(state, h, m, derive_seed(seed, 1, 0));
  return rollout_cost(burst.state, pool, derive_seed(seed, 2, 0));
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0;
  for (double x : xs) sum += x;
  return xs.empty() ? 0 : sum / static_cast<double>(xs.size());
}

int rollout_count(const SelectorConfig& cfg) {
  return std::max(1, cfg.rollouts_per_candidate);
}

}  // namespace

const char* to_string(FilterMode mode) {
  switch (mode) {
    case FilterMode::Advisor: return "advisor";
    case FilterMode::Passthrough: return "passthrough";
    case FilterMode::StaticTopK: return "static_topk";
  }
  return "?";
}

std::optional<FilterMode> filter_mode_from_string(std::string_view text) {
  if (text == "advisor") return FilterMode::Advisor;
  if (text == "passthrough") return FilterMode::Passthrough;
  if (text == "static_topk") return FilterMode::StaticTopK;
  return std::nullopt;
}

std::uint64_t rollout_seed(std::uint64_t seed, const std::string& heuristic_id,
                           std::size_t index, bool common_random_numbers) {
  const std::uint64_t stream = common_random_numbers ? kCrnStream : fnv1a64(heuristic_id);
  return derive_seed(seed, stream, index);
}

ValueEstimate mc_evaluate_serial(const ProblemState& state,
                                 const HeuristicGenome& h,
                                 const std::vector<HeuristicGenome>& pool,
                                 const SelectorConfig& cfg, std::uint64_t seed) {
  check_config(cfg);
  ValueEstimate est;
  est.heuristic_id = h.id;
  est.seed = seed;
  const int t = rollout_count(cfg);
  for (int r = 0; r < t; ++r) {
    const auto rs = rollout_seed(seed, h.id, static_cast<std::size_t>(r),
                                 cfg.common_random_numbers);
    est.rollout_costs.push_back(one_rollout(state, h, pool, cfg.m_steps, rs));
  }
  est.q_hat = mean_of(est.rollout_costs);
  return est;
}

namespace {

std::vector<ValueEstimate> evaluate_genomes(
    const ProblemState& state, const std::vector<const HeuristicGenome*>& genomes,
    const std::vector<HeuristicGenome>& pool, const SelectorConfig& cfg,
    std::uint64_t seed) {
  check_config(cfg);
  const std::size_t t = static_cast<std::size_t>(rollout_count(cfg));
  const std::size_t total = genomes.size() * t;
  std::vector<double> costs(total, 0.0);
  std::vector<std::exception_ptr> errors(total);

  auto work = [&](std::size_t k) {
    const HeuristicGenome& h = *genomes[k / t];
    try {
      costs[k] = one_rollout(state, h, pool, cfg.m_steps,
                             rollout_seed(seed, h.id, k % t, cfg.common_random_numbers));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

#ifdef HH_HAVE_OPENMP
  if (cfg.parallel && total > 1) {
    const auto n = static_cast<std::int64_t>(total);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t k = 0; k < n; ++k) work(static_cast<std::size_t>(k));
  } else {
    for (std::size_t k = 0; k < total; ++k) work(k);
  }
#else
  for (std::size_t k = 0; k < total; ++k) work(k);
#endif

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ValueEstimate> out;
  out.reserve(genomes.size());
  for (std::size_t c = 0; c < genomes.size(); ++c) {
    ValueEstimate est;
    est.heuristic_id = genomes[c]->id;
    est.seed = seed;
    est.rollout_costs.assign(costs.begin() + static_cast<std::ptrdiff_t>(c * t),
                             costs.begin() + static_cast<std::ptrdiff_t>((c + 1) * t));
    est.q_hat = mean_of(est.rollout_costs);
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace

std::vector<ValueEstimate> evaluate_candidates(
    const ProblemState& state, const std::vector<std::size_t>& candidates,
    const std::vector<HeuristicGenome>& pool, const SelectorConfig& cfg,
    std::uint64_t seed) {
  std::vector<const HeuristicGenome*> genomes;
  for (std::size_t i : candidates) genomes.push_back(&pool.at(i));
  return evaluate_genomes(state, genomes, pool, cfg, seed);
}

ValueEstimate mc_evaluate(const ProblemState& state, const HeuristicGenome& h,
                          const std::vector<HeuristicGenome>& pool,
                          const SelectorConfig& cfg, std::uint64_t seed) {
  return evaluate_genomes(state, {&h}, pool, cfg, seed).front();
}

FilterResult filter_candidates(const ProblemState& state,
                               const std::vector<HeuristicGenome>& pool,
                               const SelectorConfig& cfg, Advisor* advisor) {
  if (pool.empty()) throw Error(Errc::NoCandidates, "empty heuristic pool");
  FilterResult out;
  auto passthrough = [&] {
    out.indices.clear();
    for (std::size_t i = 0; i < pool.size(); ++i) out.indices.push_back(i);
  };
  switch (cfg.filter_mode) {
    case FilterMode::Passthrough:
      passthrough();
      return out;
    case FilterMode::StaticTopK: {
      std::vector<std::size_t> order(pool.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pool[a].info().evaluation_cost_rank < pool[b].info().evaluation_cost_rank;
      });
      const auto k = static_cast<std::size_t>(std::clamp<int>(
          cfg.static_topk, 1, static_cast<int>(pool.size())));
      order.resize(k);
      std::sort(order.begin(), order.end());
      out.indices = order;
      return out;
    }
    case FilterMode::Advisor: break;
  }
  try {
    if (!advisor) throw Error(Errc::AdvisorUnavailable, "no advisor configured");
    ScriptedContext ctx;
    ctx.pool = pool;
    ctx.state = &state;
    ctx.sense = state.inst().sense();
    AdvisorRequest req;
    req.role = AdvisorRole::Filter;
    req.prompt = render_filter_prompt(state, pool, cfg.context_budget);
    req.context_budget = cfg.context_budget;
    req.context = &ctx;
    const auto parsed = parse_filter_reply(advisor->complete(req), pool);
    if (!parsed.parse_ok) {
      throw Error(Errc::AdvisorUnavailable, "filter reply names no pool heuristic");
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (std::find(parsed.names.begin(), parsed.names.end(), pool[i].id) !=
          parsed.names.end()) {
        out.indices.push_back(i);
      }
    }
  } catch (const Error& e) {
    passthrough();
    out.fallback = true;
    out.note = e.what();
  }
  return out;
}

std::size_t argbest(const std::vector<ValueEstimate>& estimates,
                    ObjectiveSense sense) {
  if (estimates.empty()) throw Error(Errc::NoCandidates, "no estimates to rank");
  std::size_t best = 0;
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    if (is_better(estimates[i].q_hat, estimates[best].q_hat, sense)) best = i;
  }
  return best;
}

Selection select_heuristic(const ProblemState& state,
                           const std::vector<HeuristicGenome>& pool,
                           const std::vector<std::size_t>& candidates,
                           const SelectorConfig& cfg, int t_remaining,
                           std::uint64_t seed) {
  if (t_remaining < 1) throw Error(Errc::ConfigError, "t_remaining must be >= 1");
  if (candidates.empty()) throw Error(Errc::NoCandidates, "no candidate heuristics");
  Selection sel;
  if (cfg.rollouts_per_candidate == 0) {
    sel.index = candidates.front();
    return sel;
  }
  sel.estimates = evaluate_candidates(state, candidates, pool, cfg, seed);
  sel.index = candidates[argbest(sel.estimates, state.inst().sense())];
  return sel;
}

std::string decision_to_json(const DecisionRecord& record) {
  nlohmann::ordered_json j;
  j["decision"] = record.decision;
  j["step_index"] = record.step_index;
  nlohmann::ordered_json features = nlohmann::ordered_json::object();
  for (const auto& [name, value] : record.features) features[name] = value;
  j["features"] = features;
  j["candidates"] = record.candidates;
  j["chosen"] = record.chosen;
  nlohmann::ordered_json estimates = nlohmann::ordered_json::array();
  for (const auto& e : record.estimates) {
    estimates.push_back({{"heuristic", e.heuristic_id},
                         {"q_hat", e.q_hat},
                         {"rollout_costs", e.rollout_costs},
                         {"seed", e.seed}});
  }
  j["estimates"] = estimates;
  j["filter_fallback"] = record.filter_fallback;
  j["applied"] = record.applied;
  return j.dump();
}

namespace {

// Whether h's next operation (under the burst's own rng) strictly improves.
bool improves_next(const ProblemState& state, const HeuristicGenome& h,
                   std::uint64_t seed) {
  AlgorithmData data;
  Rng rng(seed);
  const auto decision = heuristic_step(h, state, data, rng);
  if (!decision.operation) return false;
  try {
    const ProblemState next = apply_operation(state, *decision.operation);
    return is_better(objective_value(next), objective_value(state), state.inst().sense());
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidOperation) return false;
    throw;
  }
}

bool produces_op(const ProblemState& state, const HeuristicGenome& h,
                 std::uint64_t seed) {
  AlgorithmData data;
  Rng rng(seed);
  return heuristic_step(h, state, data, rng).operation.has_value();
}

}  // namespace

std::vector<char> usable_heuristics(const ProblemState& state,
                                    const std::vector<HeuristicGenome>& pool,
                                    std::uint64_t seed) {
  const bool complete = is_complete(state);
  std::vector<char> usable(pool.size(), 0);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    usable[i] = complete ? improves_next(state, pool[i], seed)
                         : produces_op(state, pool[i], seed);
  }
  return usable;
}

SolveResult solve_instance(const InstancePtr& instance,
                           const std::vector<HeuristicGenome>& pool,
                           const SelectorConfig& cfg, Advisor* advisor) {
  check_config(cfg);
  if (pool.empty()) throw Error(Errc::NoCandidates, "empty heuristic pool");
  const auto started = std::chrono::steady_clock::now();
  SolveResult result;
  ProblemState state = initial_state(instance);
  result.trajectory.start = state;
  result.trajectory.seed = cfg.master_seed;
  const int cap = step_cap(*instance);
  const int max_decisions = cfg.max_decisions > 0
                                ? cfg.max_decisions
                                : (cap + cfg.m_steps - 1) / cfg.m_steps;
  AlgorithmData data;
  std::size_t last = pool.size();

  for (int d = 0; d < max_decisions; ++d) {
    if (cfg.time_limit_seconds) {
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - started;
      if (elapsed.count() >= *cfg.time_limit_seconds) {
        result.timed_out = true;
        break;
      }
    }
    const std::uint64_t dseed = derive_seed(cfg.master_seed, kDecisionStream,
                                            static_cast<std::uint64_t>(d));
    const std::uint64_t burst_seed = derive_seed(dseed, 3, 0);
    const bool complete = is_complete(state);

    const std::vector<char> usable = usable_heuristics(state, pool, burst_seed);
    if (std::find(usable.begin(), usable.end(), 1) == usable.end()) {
      if (complete) break;
      throw Error(Errc::BudgetExceeded, "no heuristic can extend the partial solution");
    }

    const FilterResult filtered = filter_candidates(state, pool, cfg, advisor);
    std::vector<std::size_t> candidates;
    for (std::size_t i : filtered.indices) {
      if (usable[i]) candidates.push_back(i);
    }
    if (candidates.empty()) {
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (usable[i]) candidates.push_back(i);
      }
    }

    const Selection sel = select_heuristic(state, pool, candidates, cfg,
                                           max_decisions - d, dseed);
    if (sel.index != last) data.clear();
    last = sel.index;

    DecisionRecord record;
    record.decision = d;
    record.step_index = state.step_index;
    record.features = extract_features(state);
    for (std::size_t i : candidates) record.candidates.push_back(pool[i].id);
    record.chosen = pool[sel.index].id;
    record.estimates = sel.estimates;
    record.filter_fallback = filtered.fallback;

    Rng rng(burst_seed);
    StepBurst burst = run_heuristic_steps(state, pool[sel.index], cfg.m_steps, rng, data);
    record.applied = burst.applied;
    const int slot = result.trajectory.heuristic_slot(pool[sel.index].id);
    for (const auto& op : burst.ops) result.trajectory.steps.push_back({op, slot});
    state = std::move(burst.state);
    result.decisions.push_back(std::move(record));
  }

  if (!is_complete(state)) {
    if (!result.timed_out) {
      throw Error(Errc::BudgetExceeded, "decision budget left the solution incomplete");
    }
    const Trajectory finish = rollout_random(state, pool, derive_seed(cfg.master_seed, 4, 0));
    for (std::size_t i = 0; i < finish.steps.size(); ++i) {
      const int slot = result.trajectory.heuristic_slot(finish.heuristic_of(i));
      result.trajectory.steps.push_back({finish.steps[i].op, slot});
    }
    state = replay(finish);
  }
  result.trajectory.terminal_cost = evaluate_cost(*instance, state.solution);
  return result;
}

}  // namespace hh
