#include "hh/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <numeric>

#include <json.hpp>

#include "hh/envs.hpp"

namespace hh {

namespace {

constexpr std::uint64_t kTrialStream = 0x7121;
constexpr std::uint64_t kSingleStream = 0x5137;
constexpr std::uint64_t kValidationStream = 0x7a1;
constexpr std::size_t kTrialBatch = 32;

using MutationHook = std::function<std::optional<OperationRecord>(
    std::size_t step, const ProblemState& state, const OperationRecord& op)>;

std::optional<HeuristicGenome> bootstrap_for(const HeuristicGenome& seed_genome,
                                             const EvolutionConfig& cfg) {
  if (seed_genome.info().constructive) return std::nullopt;
  const ProblemKind kind = seed_genome.info().problem;
  if (!cfg.random_bootstrap) return make_genome(bootstrap_family(kind));
  std::vector<Family> constructive;
  for (Family f : families_for(kind)) {
    if (family_info(f).constructive) constructive.push_back(f);
  }
  Rng rng(derive_seed(cfg.seed, fnv1a64(seed_genome.id), 0));
  return make_genome(constructive[rng.uniform_index(constructive.size())]);
}

// Bootstrap (improvement seeds on a partial solution) then the seed, each
// until NoOperation, within the step cap. The hook may swap an operation.
void run_pipeline(Trajectory& traj, ProblemState& state, const HeuristicGenome& seed_genome,
                  const std::optional<HeuristicGenome>& bootstrap, Rng& rng,
                  const MutationHook& hook) {
  const auto cap = static_cast<std::size_t>(step_cap(state.inst()));
  AlgorithmData data;
  bool boot_phase = bootstrap && !is_complete(state);
  while (traj.steps.size() < cap) {
    const HeuristicGenome& h = boot_phase ? *bootstrap : seed_genome;
    const auto op = heuristic_step(h, state, data, rng).operation;
    if (!op) {
      if (boot_phase) {
        boot_phase = false;
        data.clear();
        continue;
      }
      break;
    }
    OperationRecord use = *op;
    if (hook) {
      if (auto swapped = hook(traj.steps.size(), state, *op)) use = *swapped;
    }
    try {
      apply_operation_inplace(state, use);
    } catch (const Error& e) {
      if (e.code() != Errc::InvalidOperation) throw;
      throw Error(Errc::HeuristicFault, h.id + " produced " + to_string(use) + ": " + e.what());
    }
    traj.steps.push_back({use, traj.heuristic_slot(h.id)});
  }
}

Trajectory prefix_of(const Trajectory& basic, std::size_t k) {
  Trajectory t;
  t.start = basic.start;
  t.heuristic_ids = basic.heuristic_ids;
  t.steps.assign(basic.steps.begin(), basic.steps.begin() + static_cast<std::ptrdiff_t>(k));
  return t;
}

bool finish(Trajectory& traj, const ProblemState& state) {
  if (!is_complete(state)) return false;
  traj.terminal_cost = evaluate_cost(state.inst(), state.solution);
  return true;
}

bool is_advisor_error(Errc code) {
  switch (code) {
    case Errc::AdvisorUnavailable:
    case Errc::AdvisorParseError:
    case Errc::Timeout:
    case Errc::HttpError:
    case Errc::BudgetExhausted:
    case Errc::TranscriptMiss:
      return true;
    default:
      return false;
  }
}

std::string hex8(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%08llx", static_cast<unsigned long long>(v & 0xffffffffULL));
  return buf;
}

template <typename Parse>
auto ask_with_retries(Advisor& advisor, AdvisorRequest req, const EvolutionConfig& cfg,
                      Parse parse) {
  const std::string base = req.prompt;
  std::string error;
  for (int attempt = 0; attempt <= cfg.parse_retries; ++attempt) {
    if (attempt > 0) {
      req.prompt = base + "\nYour previous reply could not be used (" + error +
                   "). Reply again in exactly the format above.\n";
    }
    const std::string raw = advisor.complete(req);
    if (auto out = parse(raw, error)) return *out;
  }
  throw Error(Errc::AdvisorParseError,
              "no usable reply after " + std::to_string(cfg.parse_retries) +
                  " retries: " + error);
}

std::optional<StrategyEdit> usable_edit(const std::string& raw, const HeuristicGenome& g,
                                        const std::string& strategy_id, std::string& error) {
  auto parsed = parse_edit_reply(raw, g.family, strategy_id);
  if (!parsed.parse_ok) {
    error = parsed.error;
    return std::nullopt;
  }
  try {
    mutate_genome(g, *parsed.edit);
  } catch (const Error& e) {
    error = e.what();
    return std::nullopt;
  }
  return parsed.edit;
}

nlohmann::ordered_json edit_json(const StrategyEdit& edit) {
  nlohmann::ordered_json edits = nlohmann::ordered_json::array();
  for (const auto& e : edit.edits) edits.push_back({{"target", e.target}, {"value", e.value}});
  return {{"strategy_id", edit.strategy_id},
          {"family", family_info(edit.target).name},
          {"edits", edits},
          {"rationale", edit.rationale}};
}

}  // namespace

Family bootstrap_family(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Tsp: return Family::NearestNeighbor;
    case ProblemKind::Mkp: return Family::GreedyByDensity;
    case ProblemKind::MaxCut: return Family::MostWeightNeighbors;
  }
  return Family::NearestNeighbor;
}

Trajectory generate_basic(const HeuristicGenome& seed_genome, const InstancePtr& instance,
                          const EvolutionConfig& cfg, std::uint64_t seed) {
  if (seed_genome.info().problem != instance->kind) {
    throw Error(Errc::HeuristicFault, seed_genome.id + " does not target " +
                                          std::string(to_string(instance->kind)));
  }
  Trajectory traj;
  traj.start = initial_state(instance);
  traj.seed = seed;
  ProblemState state = traj.start;
  Rng rng(seed);
  run_pipeline(traj, state, seed_genome, bootstrap_for(seed_genome, cfg), rng, nullptr);
  if (!finish(traj, state)) {
    throw Error(Errc::BudgetExceeded, seed_genome.id + " left " + instance->name +
                                          " incomplete after " +
                                          std::to_string(traj.steps.size()) + " steps");
  }
  return traj;
}

Trajectory reroll(const Trajectory& prefix, const ProblemState& state,
                  const HeuristicGenome& seed_genome, const EvolutionConfig& cfg,
                  std::uint64_t seed) {
  Trajectory traj = prefix;
  traj.seed = seed;
  ProblemState cur = state;
  Rng rng(seed);
  run_pipeline(traj, cur, seed_genome, bootstrap_for(seed_genome, cfg), rng, nullptr);
  if (!finish(traj, cur)) {
    throw Error(Errc::BudgetExceeded, "re-roll left the solution incomplete");
  }
  return traj;
}

std::size_t perturbation_count(std::size_t n, double ratio) {
  if (n == 0) return 0;
  const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

std::optional<ContrastiveRecord> perturbation_trial(const Trajectory& basic,
                                                    const HeuristicGenome& seed_genome,
                                                    const EvolutionConfig& cfg,
                                                    std::uint64_t trial_seed) {
  const std::size_t n = basic.steps.size();
  if (n == 0) return std::nullopt;
  Rng rng(trial_seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t count = perturbation_count(n, cfg.perturbation_ratio);
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
  }
  std::vector<std::size_t> ks(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(ks.begin(), ks.end());

  ContrastiveRecord rec;
  rec.trial_seed = trial_seed;
  const std::size_t k0 = ks.front();
  ProblemState state = replay(basic, k0);
  const OperationRecord original = basic.steps[k0].op;
  OperationRecord replacement;
  try {
    replacement = enumerate_alternatives(state, original, 1, rng).front();
  } catch (const Error& e) {
    if (e.code() == Errc::NoAlternative) return std::nullopt;
    throw;
  }
  rec.mutations.push_back({k0, state, original, replacement});
  Trajectory traj = prefix_of(basic, k0);
  traj.seed = trial_seed;
  apply_operation_inplace(state, replacement);
  traj.steps.push_back({replacement, basic.steps[k0].heuristic});

  std::size_t next = 1;
  const MutationHook hook = [&](std::size_t step, const ProblemState& z,
                                const OperationRecord& op) -> std::optional<OperationRecord> {
    while (next < ks.size() && ks[next] < step) ++next;
    if (next >= ks.size() || ks[next] != step) return std::nullopt;
    ++next;
    try {
      const OperationRecord alt = enumerate_alternatives(z, op, 1, rng).front();
      rec.mutations.push_back({step, z, op, alt});
      return alt;
    } catch (const Error& e) {
      if (e.code() == Errc::NoAlternative) return std::nullopt;
      throw;
    }
  };
  run_pipeline(traj, state, seed_genome, bootstrap_for(seed_genome, cfg), rng, hook);
  if (!finish(traj, state)) return std::nullopt;
  const ObjectiveSense sense = basic.start.inst().sense();
  if (!is_better(traj.terminal_cost, basic.terminal_cost, sense)) return std::nullopt;
  rec.cost_delta = improvement(basic.terminal_cost, traj.terminal_cost, sense);
  rec.perturbed = std::move(traj);
  return rec;
}

std::optional<ContrastiveRecord> find_contrastive_serial(const Trajectory& basic,
                                                         const HeuristicGenome& seed_genome,
                                                         const EvolutionConfig& cfg,
                                                         std::uint64_t seed) {
  for (int t = 0; t < cfg.max_perturbation_trials; ++t) {
    auto rec = perturbation_trial(basic, seed_genome, cfg,
                                  derive_seed(seed, kTrialStream, static_cast<std::uint64_t>(t)));
    if (rec) {
      rec->trial = t;
      return rec;
    }
  }
  return std::nullopt;
}

std::optional<ContrastiveRecord> find_contrastive(const Trajectory& basic,
                                                  const HeuristicGenome& seed_genome,
                                                  const EvolutionConfig& cfg,
                                                  std::uint64_t seed) {
  if (cfg.max_perturbation_trials < 1) {
    throw Error(Errc::ConfigError, "max_perturbation_trials must be >= 1");
  }
  if (!(cfg.perturbation_ratio > 0 && cfg.perturbation_ratio <= 1)) {
    throw Error(Errc::ConfigError, "perturbation_ratio must lie in (0, 1]");
  }
  const auto total = static_cast<std::size_t>(cfg.max_perturbation_trials);
  for (std::size_t begin = 0; begin < total; begin += kTrialBatch) {
    const std::size_t size = std::min(kTrialBatch, total - begin);
    std::vector<std::optional<ContrastiveRecord>> results(size);
    std::vector<std::exception_ptr> errors(size);
    const auto n = static_cast<std::int64_t>(size);
#pragma omp parallel for schedule(dynamic, 1) if (cfg.parallel)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(i);
      try {
        results[j] = perturbation_trial(basic, seed_genome, cfg,
                                        derive_seed(seed, kTrialStream, begin + j));
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
    for (std::size_t j = 0; j < size; ++j) {
      if (errors[j]) std::rethrow_exception(errors[j]);
      if (results[j]) {
        results[j]->trial = static_cast<int>(begin + j);
        return results[j];
      }
    }
  }
  return std::nullopt;
}

std::uint64_t single_reroll_seed(std::uint64_t seed, std::size_t k) {
  return derive_seed(seed, kSingleStream, k);
}

std::optional<Trajectory> perturb_single(const Trajectory& basic, std::size_t k,
                                         const OperationRecord& replacement,
                                         const HeuristicGenome& seed_genome,
                                         const EvolutionConfig& cfg, std::uint64_t seed) {
  if (k >= basic.steps.size()) return std::nullopt;
  ProblemState state = replay(basic, k);
  try {
    apply_operation_inplace(state, replacement);
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidOperation) return std::nullopt;
    throw;
  }
  Trajectory traj = prefix_of(basic, k);
  traj.seed = seed;
  traj.steps.push_back({replacement, basic.steps[k].heuristic});
  Rng rng(seed);
  run_pipeline(traj, state, seed_genome, bootstrap_for(seed_genome, cfg), rng, nullptr);
  if (!finish(traj, state)) return std::nullopt;
  return traj;
}

CriticalAnalysis identify_critical(const Trajectory& basic, const ContrastiveRecord& record,
                                   const HeuristicGenome& seed_genome,
                                   const EvolutionConfig& cfg, std::uint64_t seed) {
  const ObjectiveSense sense = basic.start.inst().sense();
  CriticalAnalysis out;
  const std::size_t m = record.mutations.size();
  out.deltas.resize(m);
  out.singles.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& mu = record.mutations[j];
    out.singles[j] = perturb_single(basic, mu.k, mu.replacement, seed_genome, cfg,
                                    single_reroll_seed(seed, mu.k));
    if (out.singles[j]) {
      out.deltas[j] = improvement(basic.terminal_cost, out.singles[j]->terminal_cost, sense);
    }
  }
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < m; ++j) {
    if (out.deltas[j] && *out.deltas[j] > 0 && (!best || *out.deltas[j] > *out.deltas[*best])) {
      best = j;
    }
  }
  if (best) {
    const auto& mu = record.mutations[*best];
    CriticalOperation c;
    c.k_star = mu.k;
    c.z = replay(basic, mu.k);
    c.original = basic.steps[mu.k].op;
    c.replacement = mu.replacement;
    c.delta = *out.deltas[*best];
    c.reroll_seed = single_reroll_seed(seed, mu.k);
    out.critical = std::move(c);
  }
  return out;
}

double evaluate_performance(const HeuristicGenome& genome,
                            const std::vector<InstancePtr>& validation,
                            const EvolutionConfig& cfg) {
  if (validation.empty()) throw Error(Errc::ConfigError, "validation set is empty");
  double sum = 0;
  for (std::size_t i = 0; i < validation.size(); ++i) {
    sum += generate_basic(genome, validation[i], cfg,
                          derive_seed(cfg.seed, kValidationStream, i))
               .terminal_cost;
  }
  return sum / static_cast<double>(validation.size());
}

StrategyEdit extract_strategy(const HeuristicGenome& seed_genome,
                              const CriticalOperation& crit, Advisor& advisor,
                              const EvolutionConfig& cfg, const Evaluator& evaluate,
                              ObjectiveSense sense) {
  if (!(crit.delta > 0)) {
    throw Error(Errc::ConfigError, "strategy extraction needs a positive delta");
  }
  ScriptedContext ctx;
  ctx.genome = &seed_genome;
  ctx.evaluate = evaluate;
  ctx.sense = sense;
  ctx.state = &crit.z;
  AdvisorRequest req;
  req.role = AdvisorRole::Evolve;
  req.prompt = render_evolve_prompt(seed_genome, crit.z, crit.original, crit.replacement,
                                    crit.delta, cfg.context_budget);
  req.context_budget = cfg.context_budget;
  req.decoding = cfg.decoding;
  req.context = &ctx;
  const std::string strategy_id =
      "E" + hex8(fnv1a64(seed_genome.id + "|" + std::to_string(crit.k_star) + "|" +
                         to_string(crit.original) + "|" + to_string(crit.replacement)));
  return ask_with_retries(advisor, req, cfg, [&](const std::string& raw, std::string& error) {
    return usable_edit(raw, seed_genome, strategy_id, error);
  });
}

HeuristicGenome refine_genome(const HeuristicGenome& current, const StrategyEdit& strategy,
                              double p, int iteration, Advisor& advisor,
                              const EvolutionConfig& cfg, const Evaluator& evaluate,
                              ObjectiveSense sense) {
  ScriptedContext ctx;
  ctx.genome = &current;
  ctx.evaluate = evaluate;
  ctx.sense = sense;
  AdvisorRequest req;
  req.role = AdvisorRole::Refine;
  req.prompt = render_refine_prompt(current, strategy, p, iteration);
  req.context_budget = cfg.context_budget;
  req.decoding = cfg.decoding;
  req.context = &ctx;
  const std::string id = strategy.strategy_id + "/r" + std::to_string(iteration + 1);
  const StrategyEdit edit =
      ask_with_retries(advisor, req, cfg, [&](const std::string& raw, std::string& error) {
        return usable_edit(raw, current, id, error);
      });
  if (edit.edits.empty()) return current;
  return mutate_genome(current, edit);
}

std::string round_to_json(const RoundRecord& r) {
  nlohmann::ordered_json j;
  j["seed"] = r.seed_id;
  j["instance"] = r.instance;
  j["basic_cost"] = r.basic_cost;
  j["contrastive_found"] = r.contrastive_found;
  j["trials"] = r.trials;
  nlohmann::ordered_json muts = nlohmann::ordered_json::array();
  for (const auto& m : r.mutations) {
    muts.push_back({{"k", m.k},
                    {"original", to_string(m.original)},
                    {"replacement", to_string(m.replacement)}});
  }
  j["mutations"] = muts;
  j["perturbed_cost"] = r.perturbed_cost;
  nlohmann::ordered_json deltas = nlohmann::ordered_json::array();
  for (const auto& d : r.deltas) deltas.push_back(d ? nlohmann::ordered_json(*d) : nullptr);
  j["deltas"] = deltas;
  j["k_star"] = r.k_star ? nlohmann::ordered_json(*r.k_star) : nullptr;
  j["strategy"] = r.strategy ? edit_json(*r.strategy) : nullptr;
  j["p_series"] = r.p_series;
  j["accepted"] = r.accepted_ids;
  j["rejected_p"] = r.rejected_p ? nlohmann::ordered_json(*r.rejected_p) : nullptr;
  j["diagnostic"] = r.diagnostic;
  j["result"] = nlohmann::ordered_json::parse(genome_to_json(r.result));
  return j.dump();
}

RoundRecord evolve_one_round(const HeuristicGenome& seed_genome, const InstancePtr& instance,
                             const std::vector<InstancePtr>& validation,
                             const EvolutionConfig& cfg, Advisor& advisor) {
  if (cfg.max_refinement_iterations < 0) {
    throw Error(Errc::ConfigError, "max_refinement_iterations must be >= 0");
  }
  RoundRecord rec;
  rec.seed_id = seed_genome.id;
  rec.instance = instance->name;
  rec.result = seed_genome;
  const ObjectiveSense sense = instance->sense();
  const std::uint64_t round_seed = derive_seed(cfg.seed, fnv1a64(instance->name), 0);

  const Trajectory basic = generate_basic(seed_genome, instance, cfg, round_seed);
  rec.basic_cost = basic.terminal_cost;
  const auto contrastive = find_contrastive(basic, seed_genome, cfg, derive_seed(round_seed, 1, 0));
  rec.trials = contrastive ? contrastive->trial + 1 : cfg.max_perturbation_trials;
  if (!contrastive) return rec;
  rec.contrastive_found = true;
  rec.mutations = contrastive->mutations;
  rec.perturbed_cost = contrastive->perturbed.terminal_cost;

  const auto analysis =
      identify_critical(basic, *contrastive, seed_genome, cfg, derive_seed(round_seed, 2, 0));
  rec.deltas = analysis.deltas;
  if (!analysis.critical) return rec;
  rec.k_star = analysis.critical->k_star;

  std::map<std::string, double> cache;
  const Evaluator evaluate = [&](const HeuristicGenome& g) {
    const auto it = cache.find(g.id);
    if (it != cache.end()) return it->second;
    const double p = evaluate_performance(g, validation, cfg);
    cache.emplace(g.id, p);
    return p;
  };

  try {
    const StrategyEdit strategy =
        extract_strategy(seed_genome, *analysis.critical, advisor, cfg, evaluate, sense);
    rec.strategy = strategy;
    HeuristicGenome current = seed_genome;
    double p = evaluate(current);
    rec.p_series.push_back(p);
    rec.accepted_ids.push_back(current.id);
    for (int i = 0; i < cfg.max_refinement_iterations; ++i) {
      HeuristicGenome next =
          refine_genome(current, strategy, p, i, advisor, cfg, evaluate, sense);
      const double pn = evaluate(next);
      if (!is_better(pn, p, sense)) {
        rec.rejected_p = pn;
        break;
      }
      current = std::move(next);
      p = pn;
      rec.p_series.push_back(p);
      rec.accepted_ids.push_back(current.id);
    }
    rec.result = current;
  } catch (const Error& e) {
    if (!is_advisor_error(e.code())) throw;
    rec.result = seed_genome;
    rec.diagnostic = e.what();
  }
  return rec;
}

EvolutionRun evolve_pool(const std::vector<HeuristicGenome>& pool,
                         const std::vector<InstancePtr>& evolution_set,
                         const std::vector<InstancePtr>& validation,
                         const EvolutionConfig& cfg, Advisor& advisor, int rounds) {
  if (rounds < 1) throw Error(Errc::ConfigError, "evolution needs rounds >= 1");
  if (evolution_set.empty()) throw Error(Errc::ConfigError, "evolution set is empty");
  for (const auto& a : evolution_set) {
    for (const auto& b : validation) {
      if (a == b || a->name == b->name) {
        throw Error(Errc::ConfigError, "instance " + a->name +
                                           " is in both the evolution and validation sets");
      }
    }
  }
  EvolutionRun run;
  run.pool = pool;
  for (const auto& seed_genome : pool) {
    HeuristicGenome current = seed_genome;
    for (int r = 0; r < rounds; ++r) {
      for (const auto& inst : evolution_set) {
        RoundRecord rec = evolve_one_round(current, inst, validation, cfg, advisor);
        current = rec.result;
        run.rounds.push_back(std::move(rec));
      }
    }
    const bool known = std::any_of(run.pool.begin(), run.pool.end(), [&](const HeuristicGenome& g) {
      return g.same_behavior(current);
    });
    if (!known) run.pool.push_back(current);
  }
  return run;
}

}  // namespace hh
