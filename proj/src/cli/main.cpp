#include <iostream>
#include <utility>

#include <CLI11.hpp>

#include "hh/cli.hpp"

namespace hh::cli {

namespace {

struct Override {
  CLI::Option* option;
  std::string key;
  bool list;
};

std::string list_value(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", \"" : "\"") + items[i] + "\"";
  return out + "]";
}

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<Override> overrides;
  std::vector<std::string> scratch_lists;
  std::string scratch;
};

void add_common(CLI::App* sub, Options& o, std::vector<Override>& ov) {
  sub->add_option("-c,--config", o.config_path, "Config file (TOML-style sections)")->check(CLI::ExistingFile);
  sub->add_option("--set", o.sets, "Override one entry: section.key=value (repeatable)");
  const auto opt = [&](const std::string& flags, const std::string& key, const std::string& help, bool list = false) {
    CLI::Option* op = list ? sub->add_option(flags, o.scratch_lists, help) : sub->add_option(flags, o.scratch, help);
    op->multi_option_policy(list ? CLI::MultiOptionPolicy::TakeAll : CLI::MultiOptionPolicy::TakeLast);
    ov.push_back({op, key, list});
  };
  opt("--problem", "run.problem", "tsp, mkp or maxcut");
  opt("-i,--instances", "instances.paths", "Instance files, directories or globs", true);
  opt("--generate", "instances.generate", "Generate this many random instances");
  opt("--size", "instances.size", "Size of generated instances");
  opt("--instance-seed", "instances.seed", "Seed for generated instances");
  opt("--pool", "pool.source", "\"default\" or a pool file");
  opt("--advisor", "advisor.backend", "live, scripted or replay");
  opt("--transcript", "advisor.transcript", "Transcript consumed by the replay backend");
  opt("--record", "advisor.record", "Append every advisor exchange to this JSONL file");
  opt("--call-budget", "advisor.call_budget", "Maximum advisor calls");
  opt("--time-limit", "run.time_limit", "Seconds per run (0 disables)");
  opt("--repeats", "run.repeats", "Runs per instance");
  opt("-o,--out", "run.out", "Output directory");
  opt("--seed", "run.seed", "Master seed");
  opt("-j,--jobs", "run.jobs", "Instances solved concurrently");
  opt("--best-known", "run.best_known", "Best-known values file: name value min|max [source]");
}

CliConfig build_config(const Options& o, const std::vector<Override>& ov) {
  CliConfig cfg;
  if (!o.config_path.empty()) cfg = parse_config(read_file(o.config_path));
  for (const auto& x : ov) {
    if (x.option->count() == 0) continue;
    const auto& results = x.option->results();
    if (x.list) {
      set_option(cfg, x.key, list_value(results));
    } else if (x.option->get_expected_min() == 0) {
      set_option(cfg, x.key, "true");
    } else {
      set_option(cfg, x.key, results.back());
    }
  }
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(Errc::ConfigError, "--set expects section.key=value: " + s);
    set_option(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return parse_config("", cfg);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Hyper-heuristic engine with Monte Carlo heuristic selection and advisor-driven heuristic evolution "
               "for TSP, the multidimensional knapsack problem and MaxCut."};
  app.footer("TSPLIB input supports EUC_2D, CEIL_2D and EXPLICIT edge weights; GEO and other types are rejected.\n"
             "Exit codes: 0 success, 2 configuration error, 3 runtime failure.");
  app.require_subcommand(1);

  Options solve_o, evolve_o, collect_o, bench_o;
  std::vector<Override> solve_ov, evolve_ov, collect_ov, bench_ov;
  std::vector<std::string> evo_paths, val_paths, variants, seeds, report_paths;
  std::string rounds, mix, evo_gen, val_gen;
  bool verify = false;

  auto* solve = app.add_subcommand("solve", "Solve instances with the Monte Carlo selector");
  add_common(solve, solve_o, solve_ov);

  auto* evolve = app.add_subcommand("evolve", "Evolve pool members on an evolution set");
  add_common(evolve, evolve_o, evolve_ov);
  evolve_ov.push_back({evolve->add_option("--evo", evo_paths, "Evolution instances")->multi_option_policy(
                           CLI::MultiOptionPolicy::TakeAll),
                       "evolution.evo.paths", true});
  evolve_ov.push_back({evolve->add_option("--evo-generate", evo_gen, "Generated evolution instances"),
                       "evolution.evo.generate", false});
  evolve_ov.push_back({evolve->add_option("--val", val_paths, "Validation instances")->multi_option_policy(
                           CLI::MultiOptionPolicy::TakeAll),
                       "evolution.val.paths", true});
  evolve_ov.push_back({evolve->add_option("--val-generate", val_gen, "Generated validation instances"),
                       "evolution.val.generate", false});
  evolve_ov.push_back({evolve->add_option("--rounds", rounds, "Rounds over the evolution set per seed"),
                       "evolution.rounds", false});
  evolve_ov.push_back({evolve->add_option("--seeds", seeds, "Genome ids or family names to evolve")
                           ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll),
                       "evolution.seeds", true});
  evolve_ov.push_back({evolve->add_flag("--fallback", "Fall back to the scripted advisor when unavailable"),
                       "evolution.fallback", false});

  auto* collect = app.add_subcommand("collect", "Collect an offline reward dataset");
  add_common(collect, collect_o, collect_ov);
  collect_ov.push_back({collect->add_option("--mix", mix, "Probability of greedy sampling"), "rewards.greedy_mix",
                        false});

  auto* bench = app.add_subcommand("bench", "Compare pool and selector variants on matched seeds");
  add_common(bench, bench_o, bench_ov);
  bench_ov.push_back({bench->add_option("--variant", variants, "name=pool:mc|random|first (repeatable)")
                          ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll),
                      "bench.variants", true});

  auto* report = app.add_subcommand("report", "Summarize run records and optionally verify them");
  report->add_option("paths", report_paths, "Run record files or directories")->required();
  report->add_flag("--verify", verify, "Replay and re-execute every record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*report) return cmd_report(report_paths, verify, std::cout);
    if (*solve) return cmd_solve(build_config(solve_o, solve_ov), std::cout).failures == 0 ? 0 : 3;
    if (*evolve) {
      cmd_evolve(build_config(evolve_o, evolve_ov), std::cout);
      return 0;
    }
    if (*collect) {
      cmd_collect(build_config(collect_o, collect_ov), std::cout);
      return 0;
    }
    if (*bench) {
      cmd_bench(build_config(bench_o, bench_ov), std::cout);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::ConfigError ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace hh::cli
