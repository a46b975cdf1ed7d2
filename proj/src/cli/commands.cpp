#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hh/cli.hpp"
#include "hh/engine.hpp"
#include "hh/envs.hpp"
#include "hh/rng.hpp"

namespace hh::cli {

namespace fs = std::filesystem;

namespace {

std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  }
  return out.empty() ? "instance" : out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int precision = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::optional<double> gap_of(const ProblemInstance& inst, double cost) {
  if (!inst.best_known) return std::nullopt;
  try {
    return compute_gap(cost, inst.best_known->value, inst.best_known->sense);
  } catch (const Error&) {
    return std::nullopt;
  }
}

SelectorConfig run_selector(const CliConfig& cfg) {
  SelectorConfig sc = cfg.selector;
  if (cfg.time_limit > 0) sc.time_limit_seconds = cfg.time_limit;
  if (cfg.jobs > 1) sc.parallel = false;
  return sc;
}

void reset_transcript(const CliConfig& cfg) {
  if (!cfg.record_transcript.empty()) write_file(cfg.record_transcript, "");
}

std::vector<std::string> genome_texts(const std::vector<HeuristicGenome>& pool) {
  std::vector<std::string> out;
  for (const auto& g : pool) out.push_back(genome_to_text(g));
  return out;
}

RunRecord solve_run(const CliConfig& cfg, const std::string& snapshot, const InstancePtr& inst,
                    const std::vector<HeuristicGenome>& pool, Advisor* advisor, std::uint64_t seed,
                    std::vector<DecisionRecord>* decisions) {
  SelectorConfig sc = run_selector(cfg);
  sc.master_seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  auto result = solve_instance(inst, pool, sc, advisor);
  RunRecord rec;
  rec.config_json = snapshot;
  rec.instance = inst;
  rec.seed = seed;
  rec.pool = genome_texts(pool);
  rec.trajectory = std::move(result.trajectory);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.timed_out = result.timed_out;
  rec.gap = gap_of(*inst, rec.trajectory.terminal_cost);
  if (decisions) *decisions = std::move(result.decisions);
  return rec;
}

// Live runs can only be re-executed through their recorded transcript.
std::optional<std::string> prepare_rerun(CliConfig& cfg) {
  if (cfg.advisor_backend == "live") {
    if (cfg.record_transcript.empty() || !fs::exists(cfg.record_transcript)) {
      return "live advisor run without a recorded transcript";
    }
    cfg.advisor_backend = "replay";
    cfg.transcript = cfg.record_transcript;
  }
  cfg.record_transcript.clear();
  return std::nullopt;
}

std::string pad(const std::string& s, std::size_t width) {
  std::size_t len = 0;
  for (unsigned char c : s) len += (c & 0xC0) != 0x80;
  return len >= width ? s : s + std::string(width - len, ' ');
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    widths.resize(std::max(widths.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) {
      std::size_t len = 0;
      for (unsigned char ch : r[c]) len += (ch & 0xC0) != 0x80;
      widths[c] = std::max(widths[c], len);
    }
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) line += (c ? "  " : "") + pad(r[c], widths[c]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

std::vector<HeuristicGenome> pick_seeds(const std::vector<HeuristicGenome>& pool,
                                        const std::vector<std::string>& names) {
  if (names.empty()) return pool;
  std::vector<HeuristicGenome> out;
  for (const auto& name : names) {
    bool found = false;
    for (const auto& g : pool) {
      if (g.id == name || g.info().name == name) {
        out.push_back(g);
        found = true;
        break;
      }
    }
    if (!found) throw Error(Errc::ConfigError, "evolution seed '" + name + "' is not in the pool");
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// solve

std::string solve_table(const std::vector<SolveRow>& rows) {
  std::vector<std::vector<std::string>> t{{"instance", "best-known", "cost", "gap %", "runs", "timeouts"}};
  for (const auto& r : rows) {
    t.push_back({r.instance, r.best_known ? num(*r.best_known) : "n/a", format_mean_spread(r.costs),
                 r.gaps.empty() ? "n/a" : format_mean_spread(r.gaps),
                 std::to_string(r.costs.size()) + (r.failures ? " (" + std::to_string(r.failures) + " failed)" : ""),
                 std::to_string(r.timeouts)});
  }
  return render_table(t);
}

SolveOutcome cmd_solve(const CliConfig& cfg, std::ostream& log) {
  const auto pool = load_pool(cfg.problem, cfg.pool_source);
  const auto instances = load_instance_set(cfg.problem, cfg.instances, cfg.best_known_path);
  if (instances.empty()) throw Error(Errc::ConfigError, "no instances to solve");
  reset_transcript(cfg);
  const auto advisor = make_advisor(cfg);
  const std::string snapshot = config_snapshot_json(cfg);
  const fs::path out(cfg.out_dir);
  fs::create_directories(out / "runs");
  fs::create_directories(out / "decisions");

  const std::size_t reps = static_cast<std::size_t>(cfg.repeats);
  const std::size_t tasks = instances.size() * reps;
  std::vector<std::optional<RunRecord>> results(tasks);
  std::vector<std::string> paths(tasks), errors(tasks);

#ifdef HH_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs) if (cfg.jobs > 1)
#endif
  for (std::size_t t = 0; t < tasks; ++t) {
    const auto& inst = instances[t / reps];
    const std::size_t r = t % reps;
    const std::string stem = file_stem(inst->name) + "-r" + std::to_string(r + 1);
    try {
      std::vector<DecisionRecord> decisions;
      const std::uint64_t seed = derive_seed(cfg.seed, fnv1a64(inst->name), r);
      RunRecord rec = solve_run(cfg, snapshot, inst, pool, advisor.get(), seed, &decisions);
      rec.decision_log = (fs::path("decisions") / (stem + ".jsonl")).string();
      std::string lines;
      for (const auto& d : decisions) lines += decision_to_json(d) + "\n";
      write_file((out / rec.decision_log).string(), lines);
      paths[t] = (out / "runs" / (stem + ".json")).string();
      write_file(paths[t], run_record_to_json(rec) + "\n");
      results[t] = std::move(rec);
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  }

  SolveOutcome outcome;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    SolveRow row;
    row.instance = instances[i]->name;
    if (instances[i]->best_known) row.best_known = instances[i]->best_known->value;
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t t = i * reps + r;
      if (!results[t]) {
        ++row.failures;
        log << "error: " << row.instance << " run " << r + 1 << ": " << errors[t] << "\n";
        continue;
      }
      const auto& rec = *results[t];
      row.costs.push_back(rec.trajectory.terminal_cost);
      if (rec.gap) row.gaps.push_back(*rec.gap);
      if (rec.timed_out) ++row.timeouts;
      outcome.records.push_back(rec);
      outcome.record_paths.push_back(paths[t]);
    }
    outcome.failures += row.failures;
    outcome.rows.push_back(std::move(row));
  }

  std::ostringstream csv;
  csv << "instance,best_known,runs,failures,timeouts,mean_cost,mean_gap\n";
  for (const auto& r : outcome.rows) {
    csv << r.instance << ',' << (r.best_known ? num(*r.best_known) : "") << ',' << r.costs.size() << ','
        << r.failures << ',' << r.timeouts << ',' << (r.costs.empty() ? "" : num(mean(r.costs))) << ','
        << (r.gaps.empty() ? "" : num(mean(r.gaps))) << '\n';
  }
  write_file((out / "solve.csv").string(), csv.str());
  const std::string table = solve_table(outcome.rows);
  write_file((out / "solve_table.txt").string(), table);
  log << table;
  return outcome;
}

// ---------------------------------------------------------------------------
// evolve

EvolveOutcome cmd_evolve(const CliConfig& cfg, std::ostream& log) {
  const auto pool = load_pool(cfg.problem, cfg.pool_source);
  const auto seeds = pick_seeds(pool, cfg.evolution_seeds);
  const auto evo = load_instance_set(cfg.problem, cfg.evolution_instances, cfg.best_known_path);
  const auto val = load_instance_set(cfg.problem, cfg.validation_instances, cfg.best_known_path);
  if (evo.empty()) throw Error(Errc::ConfigError, "evolution set is empty");
  if (val.empty()) throw Error(Errc::ConfigError, "validation set is empty");
  reset_transcript(cfg);
  const auto advisor = make_advisor(cfg, cfg.advisor_fallback);
  EvolutionConfig ec = cfg.evolution;
  ec.seed = cfg.seed;

  EvolveOutcome outcome;
  outcome.run = evolve_pool(seeds, evo, val, ec, *advisor, cfg.evolution_rounds);
  outcome.final_pool = pool;
  for (const auto& g : outcome.run.pool) {
    const bool known = std::any_of(outcome.final_pool.begin(), outcome.final_pool.end(),
                                   [&](const HeuristicGenome& p) { return p.same_behavior(g); });
    if (!known) outcome.final_pool.push_back(g);
  }
  const std::size_t per_seed = static_cast<std::size_t>(cfg.evolution_rounds) * evo.size();
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const auto& last = outcome.run.rounds[(s + 1) * per_seed - 1].result;
    if (!last.same_behavior(seeds[s])) outcome.evolved_from[last.id] = seeds[s].id;
  }
  std::map<std::string, double> performance;
  for (const auto& g : outcome.final_pool) {
    const bool relevant = std::any_of(seeds.begin(), seeds.end(), [&](const auto& s) { return s.id == g.id; }) ||
                          outcome.evolved_from.count(g.id);
    if (relevant) performance[g.id] = evaluate_performance(g, val, ec);
  }
  for (const auto& s : seeds) outcome.seed_performance[s.id] = performance[s.id];

  const fs::path out(cfg.out_dir);
  fs::create_directories(out / "genomes");
  for (const auto& g : outcome.final_pool) {
    write_file((out / "genomes" / (file_stem(g.id) + ".txt")).string(), genome_to_text(g));
  }
  write_file((out / "pool.txt").string(), pool_to_text(outcome.final_pool));

  std::ostringstream csv, jsonl;
  csv << "seed,round,instance,basic_cost,contrastive,k_star,p_series,accepted,result,diagnostic\n";
  for (std::size_t i = 0; i < outcome.run.rounds.size(); ++i) {
    const auto& r = outcome.run.rounds[i];
    std::string series, accepted;
    for (double p : r.p_series) series += (series.empty() ? "" : ";") + num(p);
    for (const auto& a : r.accepted_ids) accepted += (accepted.empty() ? "" : ";") + a;
    std::string diag = r.diagnostic;
    std::replace(diag.begin(), diag.end(), ',', ';');
    std::replace(diag.begin(), diag.end(), '\n', ' ');
    csv << seeds[i / per_seed].id << ',' << i % per_seed + 1 << ',' << r.instance << ',' << num(r.basic_cost) << ','
        << (r.contrastive_found ? 1 : 0) << ',' << (r.k_star ? std::to_string(*r.k_star) : "") << ','
        << series << ',' << accepted << ',' << r.result.id << ',' << diag << '\n';
    jsonl << round_to_json(r) << '\n';
  }
  write_file((out / "evolution_report.csv").string(), csv.str());
  write_file((out / "evolution_rounds.jsonl").string(), jsonl.str());

  nlohmann::ordered_json rec;
  rec["kind"] = "evolution";
  rec["config"] = nlohmann::ordered_json::parse(config_snapshot_json(cfg));
  rec["seed"] = cfg.seed;
  std::vector<std::string> seed_ids, pool_ids;
  for (const auto& s : seeds) seed_ids.push_back(s.id);
  for (const auto& g : outcome.final_pool) pool_ids.push_back(g.id);
  rec["seeds"] = seed_ids;
  rec["pool"] = pool_ids;
  rec["evolved_from"] = outcome.evolved_from;
  rec["performance"] = performance;
  outcome.record_path = (out / "evolution_record.json").string();
  write_file(outcome.record_path, rec.dump(2) + "\n");

  for (const auto& s : seeds) {
    std::string line = s.id + ": p = " + fixed(performance[s.id]);
    for (const auto& [id, from] : outcome.evolved_from) {
      if (from == s.id) line += " -> " + fixed(performance[id]) + " (" + id + ")";
    }
    log << line << "\n";
  }
  log << outcome.final_pool.size() << " genomes written to " << (out / "pool.txt").string() << "\n";
  return outcome;
}

// ---------------------------------------------------------------------------
// collect

CollectOutcome cmd_collect(const CliConfig& cfg, std::ostream& log) {
  const auto pool = load_pool(cfg.problem, cfg.pool_source);
  const auto instances = load_instance_set(cfg.problem, cfg.instances, cfg.best_known_path);
  if (instances.empty()) log << "warning: no instances; the dataset will only hold its header\n";
  reset_transcript(cfg);
  const auto advisor = make_advisor(cfg);
  DatasetConfig dc;
  dc.selector = cfg.selector;
  dc.rewards = cfg.rewards;
  dc.greedy_mix = cfg.greedy_mix;
  dc.seed = cfg.seed;
  CollectOutcome outcome;
  fs::create_directories(cfg.out_dir);
  outcome.path = (fs::path(cfg.out_dir) / "dataset.jsonl").string();
  if (instances.empty()) {
    write_file(outcome.path, dataset_header_json(dc, pool, cfg.problem) + "\n");
  } else {
    outcome.summary = collect_offline_dataset(instances, pool, dc, advisor.get(), outcome.path);
  }
  std::ifstream in(outcome.path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    (j.at("kind") == "greedy" ? outcome.greedy : outcome.stochastic) += 1;
  }
  log << outcome.summary.records << " samples (" << outcome.greedy << " greedy, " << outcome.stochastic
      << " stochastic) written to " << outcome.path << "\n";
  return outcome;
}

// ---------------------------------------------------------------------------
// bench

BenchVariant parse_variant(const std::string& spec) {
  BenchVariant v;
  const auto eq = spec.find('=');
  std::string rest = spec;
  if (eq != std::string::npos) {
    v.name = spec.substr(0, eq);
    rest = spec.substr(eq + 1);
  }
  const auto colon = rest.rfind(':');
  v.pool_source = colon == std::string::npos ? rest : rest.substr(0, colon);
  v.selector = colon == std::string::npos ? "mc" : rest.substr(colon + 1);
  if (v.pool_source.empty()) v.pool_source = "default";
  if (v.name.empty()) v.name = v.pool_source + ":" + v.selector;
  if (v.selector != "mc" && v.selector != "random" && v.selector != "first") {
    throw Error(Errc::ConfigError, "variant selector must be mc, random or first: " + spec);
  }
  return v;
}

BenchOutcome cmd_bench(const CliConfig& cfg, std::ostream& log) {
  BenchOutcome outcome;
  for (const auto& spec : cfg.bench_variants) outcome.variants.push_back(parse_variant(spec));
  if (outcome.variants.size() < 2) throw Error(Errc::ConfigError, "bench needs at least two variants");
  std::vector<std::vector<HeuristicGenome>> pools;
  for (const auto& v : outcome.variants) pools.push_back(load_pool(cfg.problem, v.pool_source));
  const auto instances = load_instance_set(cfg.problem, cfg.instances, cfg.best_known_path);
  if (instances.empty()) throw Error(Errc::ConfigError, "no instances to benchmark");
  reset_transcript(cfg);
  const auto advisor = make_advisor(cfg);
  const std::size_t nv = outcome.variants.size();
  const std::size_t reps = static_cast<std::size_t>(cfg.repeats);
  outcome.costs.assign(instances.size(), std::vector<double>(nv, 0.0));
  outcome.gaps.assign(instances.size(), std::vector<std::optional<double>>(nv));
  std::vector<std::string> errors(instances.size());

#ifdef HH_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs) if (cfg.jobs > 1)
#endif
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    try {
      for (std::size_t v = 0; v < nv; ++v) {
        std::vector<double> costs;
        for (std::size_t r = 0; r < reps; ++r) {
          const std::uint64_t seed = derive_seed(cfg.seed, fnv1a64(inst->name), r);
          const auto& variant = outcome.variants[v];
          if (variant.selector == "random") {
            costs.push_back(rollout_random(initial_state(inst), pools[v], seed).terminal_cost);
            continue;
          }
          SelectorConfig sc = run_selector(cfg);
          sc.master_seed = seed;
          if (variant.selector == "first") sc.rollouts_per_candidate = 0;
          costs.push_back(solve_instance(inst, pools[v], sc, advisor.get()).trajectory.terminal_cost);
        }
        outcome.costs[i][v] = mean(costs);
        outcome.gaps[i][v] = gap_of(*inst, outcome.costs[i][v]);
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!errors[i].empty()) throw Error(Errc::HeuristicFault, instances[i]->name + ": " + errors[i]);
    outcome.instances.push_back(instances[i]->name);
  }

  std::ostringstream csv;
  csv << "instance";
  for (const auto& v : outcome.variants) csv << ',' << v.name << "_cost";
  for (const auto& v : outcome.variants) csv << ',' << v.name << "_gap";
  csv << '\n';
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"instance"};
  for (const auto& v : outcome.variants) header.push_back(v.name + " cost");
  for (const auto& v : outcome.variants) header.push_back(v.name + " gap %");
  table.push_back(header);
  std::vector<double> cost_sum(nv, 0.0), gap_sum(nv, 0.0);
  std::vector<std::size_t> gap_count(nv, 0);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    std::vector<std::string> row{outcome.instances[i]};
    csv << outcome.instances[i];
    for (std::size_t v = 0; v < nv; ++v) {
      csv << ',' << num(outcome.costs[i][v]);
      row.push_back(fixed(outcome.costs[i][v]));
      cost_sum[v] += outcome.costs[i][v];
    }
    for (std::size_t v = 0; v < nv; ++v) {
      const auto& g = outcome.gaps[i][v];
      csv << ',' << (g ? num(*g) : "n/a");
      row.push_back(g ? fixed(*g) : "n/a");
      if (g) {
        gap_sum[v] += *g;
        ++gap_count[v];
      }
    }
    csv << '\n';
    table.push_back(row);
  }
  std::vector<std::string> avg{"average"};
  csv << "average";
  const double n = static_cast<double>(instances.size());
  for (std::size_t v = 0; v < nv; ++v) {
    csv << ',' << num(cost_sum[v] / n);
    avg.push_back(fixed(cost_sum[v] / n));
  }
  for (std::size_t v = 0; v < nv; ++v) {
    const bool all = gap_count[v] == instances.size();
    csv << ',' << (all ? num(gap_sum[v] / n) : "n/a");
    avg.push_back(all ? fixed(gap_sum[v] / n) : "n/a");
  }
  csv << '\n';
  table.push_back(avg);

  fs::create_directories(cfg.out_dir);
  outcome.csv_path = (fs::path(cfg.out_dir) / "bench.csv").string();
  write_file(outcome.csv_path, csv.str());
  const std::string text = render_table(table);
  write_file((fs::path(cfg.out_dir) / "bench.txt").string(), text);
  log << text;
  return outcome;
}

// ---------------------------------------------------------------------------
// report and verification

namespace {

VerifyResult verify_solve(const std::string& path, const std::string& text) {
  VerifyResult v{path, false, ""};
  const RunRecord rec = run_record_from_json(text);
  const double replayed = trajectory_cost(rec.trajectory);
  if (replayed != rec.trajectory.terminal_cost) {
    v.detail = "replayed cost " + num(replayed) + " != recorded " + num(rec.trajectory.terminal_cost);
    return v;
  }
  if (rec.timed_out) {
    v.ok = true;
    v.detail = "replay ok; not re-executed: the run stopped at a wall-clock limit";
    return v;
  }
  CliConfig cfg = config_from_snapshot(rec.config_json);
  if (auto why = prepare_rerun(cfg)) {
    v.detail = "replay ok; not re-executed: " + *why;
    v.ok = true;
    return v;
  }
  std::vector<HeuristicGenome> pool;
  for (const auto& t : rec.pool) pool.push_back(genome_from_text(t));
  if (pool.empty()) pool = load_pool(cfg.problem, cfg.pool_source);
  const auto advisor = make_advisor(cfg);
  const RunRecord again = solve_run(cfg, rec.config_json, rec.instance, pool, advisor.get(), rec.seed, nullptr);
  if (again.trajectory.steps != rec.trajectory.steps) {
    v.detail = "re-execution produced a different trajectory";
    return v;
  }
  if (again.trajectory.terminal_cost != rec.trajectory.terminal_cost) {
    v.detail = "re-execution cost " + num(again.trajectory.terminal_cost) + " != " +
               num(rec.trajectory.terminal_cost);
    return v;
  }
  v.ok = true;
  v.detail = "terminal cost " + num(rec.trajectory.terminal_cost) + " reproduced over " +
             std::to_string(rec.trajectory.steps.size()) + " steps";
  return v;
}

VerifyResult verify_evolution(const std::string& path, const nlohmann::json& j) {
  VerifyResult v{path, false, ""};
  CliConfig cfg = config_from_snapshot(j.at("config").dump());
  if (auto why = prepare_rerun(cfg)) {
    v.detail = "not re-executed: " + *why;
    return v;
  }
  const fs::path tmp = fs::temp_directory_path() /
                       ("hh_verify_" + std::to_string(fnv1a64(path + std::to_string(
                                                                  std::chrono::steady_clock::now()
                                                                      .time_since_epoch()
                                                                      .count()))));
  cfg.out_dir = tmp.string();
  std::ostringstream sink;
  EvolveOutcome again;
  try {
    again = cmd_evolve(cfg, sink);
  } catch (...) {
    fs::remove_all(tmp);
    throw;
  }
  const auto fresh = nlohmann::json::parse(read_file(again.record_path));
  fs::remove_all(tmp);
  if (fresh.at("pool") != j.at("pool")) {
    v.detail = "re-executed evolution produced a different pool";
    return v;
  }
  if (fresh.at("performance") != j.at("performance")) {
    v.detail = "re-executed evolution produced different validation costs";
    return v;
  }
  v.ok = true;
  v.detail = "pool of " + std::to_string(j.at("pool").size()) + " genomes and validation costs reproduced";
  return v;
}

std::vector<std::string> record_files(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw Error(Errc::ConfigError, "no such record file or directory: " + p);
    }
  }
  return out;
}

}  // namespace

VerifyResult verify_record(const std::string& path) {
  try {
    const std::string text = read_file(path);
    const auto j = nlohmann::json::parse(text);
    if (j.value("kind", "") == "evolution") return verify_evolution(path, j);
    return verify_solve(path, text);
  } catch (const std::exception& e) {
    return {path, false, e.what()};
  }
}

int cmd_report(const std::vector<std::string>& paths, bool verify, std::ostream& out) {
  const auto files = record_files(paths);
  std::map<std::string, SolveRow> rows;
  std::vector<std::string> order;
  for (const auto& f : files) {
    const auto j = nlohmann::json::parse(read_file(f), nullptr, false);
    if (j.is_discarded() || !j.contains("trajectory")) continue;
    const RunRecord rec = run_record_from_json(read_file(f));
    const std::string& name = rec.instance->name;
    if (!rows.count(name)) {
      order.push_back(name);
      rows[name].instance = name;
      if (rec.instance->best_known) rows[name].best_known = rec.instance->best_known->value;
    }
    auto& row = rows[name];
    row.costs.push_back(rec.trajectory.terminal_cost);
    if (rec.gap) row.gaps.push_back(*rec.gap);
    if (rec.timed_out) ++row.timeouts;
  }
  std::vector<SolveRow> table;
  for (const auto& name : order) table.push_back(rows[name]);
  if (!table.empty()) out << solve_table(table);
  int failures = 0;
  if (verify) {
    for (const auto& f : files) {
      const auto j = nlohmann::json::parse(read_file(f), nullptr, false);
      if (j.is_discarded() || (!j.contains("trajectory") && j.value("kind", "") != "evolution")) continue;
      const auto v = verify_record(f);
      out << (v.ok ? "PASS " : "FAIL ") << f << ": " << v.detail << "\n";
      failures += v.ok ? 0 : 1;
    }
  }
  return failures == 0 ? 0 : 3;
}

}  // namespace hh::cli
