#pragma once

// Command layer behind the `hh` executable: configuration, instance and pool
// loading, and the solve / evolve / collect / bench / report commands.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hh/advisor.hpp"
#include "hh/evolution.hpp"
#include "hh/io.hpp"
#include "hh/rewards.hpp"
#include "hh/selector.hpp"

namespace hh::cli {

/// Files, directories or globs, plus optionally generated instances.
struct InstanceSource {
  std::vector<std::string> paths;
  int generate = 0;
  int size = 50;
  std::uint64_t seed = 1;
};

struct CliConfig {
  ProblemKind problem = ProblemKind::Tsp;
  InstanceSource instances;
  std::string pool_source = "default";  // or a pool / genome file
  SelectorConfig selector;
  EvolutionConfig evolution;
  int evolution_rounds = 1;
  std::vector<std::string> evolution_seeds;  // empty = every pool member
  InstanceSource evolution_instances;
  InstanceSource validation_instances;
  bool advisor_fallback = false;
  RewardConfig rewards;
  double greedy_mix = 0.5;
  std::string advisor_backend = "scripted";  // live | scripted | replay
  std::string transcript;                    // replay input
  std::string record_transcript;             // appended exchanges
  std::optional<long> call_budget;
  double advisor_timeout = 60;
  int advisor_retries = 3;
  double time_limit = 7200;  // seconds per solve run
  int repeats = 3;
  std::string out_dir = "hh_out";
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string best_known_path;
  std::vector<std::string> bench_variants;  // name=pool:selector
};

/// Sets one `section.key` entry from its text form. Throws ConfigError.
void set_option(CliConfig& cfg, const std::string& key, const std::string& value);

/// Every key with its canonical text value.
std::map<std::string, std::string> config_entries(const CliConfig& cfg);
std::vector<std::string> config_keys();

/// TOML-style text: `[section]` headers, `key = value` lines, `#` comments,
/// quoted strings and `[a, b]` lists.
CliConfig parse_config(const std::string& text, CliConfig base = {});
std::string config_snapshot_json(const CliConfig& cfg);
CliConfig config_from_snapshot(const std::string& json);

/// Paths must exist; directories contribute every regular file, sorted.
std::vector<InstancePtr> load_instance_set(ProblemKind kind, const InstanceSource& source,
                                           const std::string& best_known_path);

/// "default" or a file of genome texts separated by `---` lines.
std::vector<HeuristicGenome> load_pool(ProblemKind kind, const std::string& source);
std::string pool_to_text(const std::vector<HeuristicGenome>& pool);
std::vector<HeuristicGenome> pool_from_text(const std::string& text);

/// Backend from the config, wrapped in a recorder when a transcript path is
/// set. `fallback` degrades unavailable backends to the scripted one.
AdvisorPtr make_advisor(const CliConfig& cfg, bool fallback = false);

/// Mean and sample standard deviation; the deviation is omitted from the
/// text form when it is zero.
std::string format_mean_spread(const std::vector<double>& values, int precision = 2);

struct SolveRow {
  std::string instance;
  std::optional<double> best_known;
  std::vector<double> costs;
  std::vector<double> gaps;
  int timeouts = 0;
  int failures = 0;
};

struct SolveOutcome {
  std::vector<RunRecord> records;
  std::vector<std::string> record_paths;
  std::vector<SolveRow> rows;
  int failures = 0;
};

/// Per instance and repeat: solve_instance, a run record and a decision log.
SolveOutcome cmd_solve(const CliConfig& cfg, std::ostream& log);
std::string solve_table(const std::vector<SolveRow>& rows);

struct EvolveOutcome {
  EvolutionRun run;
  std::vector<HeuristicGenome> final_pool;
  std::map<std::string, double> seed_performance;   // seed id -> p on validation
  std::map<std::string, std::string> evolved_from;  // new id -> seed id
  std::string record_path;
};

EvolveOutcome cmd_evolve(const CliConfig& cfg, std::ostream& log);

struct CollectOutcome {
  DatasetSummary summary;
  std::size_t greedy = 0;
  std::size_t stochastic = 0;
  std::string path;
};

CollectOutcome cmd_collect(const CliConfig& cfg, std::ostream& log);

struct BenchVariant {
  std::string name;
  std::string pool_source;
  std::string selector;  // mc | random | first
};

BenchVariant parse_variant(const std::string& spec);

struct BenchOutcome {
  std::vector<BenchVariant> variants;
  std::vector<std::string> instances;
  std::vector<std::vector<double>> costs;  // [instance][variant], mean over repeats
  std::vector<std::vector<std::optional<double>>> gaps;
  std::string csv_path;
};

BenchOutcome cmd_bench(const CliConfig& cfg, std::ostream& log);

struct VerifyResult {
  std::string path;
  bool ok = false;
  std::string detail;
};

/// Replays a solve run record and re-executes it from its config snapshot;
/// reruns an evolution record and compares its pool and performances.
VerifyResult verify_record(const std::string& path);

/// Gap table over run records (files or directories), optionally verified.
int cmd_report(const std::vector<std::string>& paths, bool verify, std::ostream& out);

/// Entry point of the `hh` executable. Exit codes: 0 ok, 2 configuration
/// error, 3 runtime failure.
int run(int argc, char** argv);

}  // namespace hh::cli
