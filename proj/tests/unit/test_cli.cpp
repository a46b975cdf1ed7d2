#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hh/cli.hpp"
#include "hh/heuristics.hpp"
#include "support.hpp"

using namespace hh;
using namespace hh::cli;
using namespace hh::test;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hh_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_tsp(const fs::path& dir, const InstancePtr& inst) {
  const auto path = (dir / (inst->name + ".tsp")).string();
  write_file(path, serialize_tsplib(*inst));
  return path;
}

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "hh");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> lines_of(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

CliConfig small_solve_config(const fs::path& out) {
  CliConfig cfg;
  cfg.problem = ProblemKind::Tsp;
  cfg.selector.rollouts_per_candidate = 3;
  cfg.out_dir = out.string();
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("config text: sections, comments, quoting and lists") {
  const auto cfg = parse_config(R"(
# experiment
[run]
problem = "maxcut"   # trailing comment
repeats = 2
seed = 17
out = "dir # not a comment"

[selector]
rollouts = 4
filter = "static_topk"
static_topk = 3

[instances]
paths = ["a.txt", "b.txt"]

[advisor]
call_budget = 12
)");
  CHECK(cfg.problem == ProblemKind::MaxCut);
  CHECK(cfg.repeats == 2);
  CHECK(cfg.seed == 17);
  CHECK(cfg.out_dir == "dir # not a comment");
  CHECK(cfg.selector.rollouts_per_candidate == 4);
  CHECK(cfg.selector.filter_mode == FilterMode::StaticTopK);
  CHECK(cfg.selector.static_topk == 3);
  CHECK(cfg.instances.paths == std::vector<std::string>{"a.txt", "b.txt"});
  CHECK(cfg.call_budget == 12);
}

TEST_CASE("config defaults follow the experimental setup") {
  const CliConfig cfg;
  CHECK(cfg.time_limit == 7200);
  CHECK(cfg.repeats == 3);
  CHECK(cfg.advisor_backend == "scripted");
}

TEST_CASE("config errors") {
  const auto code_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(code_of("[run]\nrepeats = 0\n").find("line 2") != std::string::npos);
  CHECK(code_of("nonsense = 1\n").find("unknown config key") != std::string::npos);
  CHECK(code_of("[run]\nproblem = vrp\n").find("tsp, mkp or maxcut") != std::string::npos);
  CHECK(code_of("[advisor]\nbackend = \"oracle\"\n") != "no error");
  CHECK(code_of("[rewards]\ngreedy_mix = 1.5\n") != "no error");
  CHECK(code_of("just words\n").find("expected key = value") != std::string::npos);
}

TEST_CASE("config snapshot round trip covers every key") {
  CliConfig cfg;
  cfg.problem = ProblemKind::Mkp;
  cfg.seed = 99;
  cfg.selector.m_steps = 3;
  cfg.rewards.n_pos = 5;
  cfg.rewards.cpr_rel_tol = 0.25;
  cfg.call_budget = 7;
  cfg.evolution_seeds = {"greedy_by_density"};
  cfg.validation_instances.generate = 4;
  cfg.bench_variants = {"a=default:mc", "b=default:random"};
  const auto back = config_from_snapshot(config_snapshot_json(cfg));
  CHECK(config_entries(back) == config_entries(cfg));
  CHECK(config_entries(cfg).size() == config_keys().size());
  const auto defaults = config_from_snapshot(config_snapshot_json(CliConfig{}));
  CHECK(config_entries(defaults) == config_entries(CliConfig{}));
}

TEST_CASE("mean and spread formatting omits zero deviation") {
  CHECK(format_mean_spread({2, 2, 2}) == "2.00");
  CHECK(format_mean_spread({1, 3}) == "2.00 ± 1.41");
}

TEST_CASE("instance sets: missing paths, directories and generation") {
  const auto dir = fresh_dir("sets");
  CHECK_THROWS_AS(load_instance_set(ProblemKind::Tsp, {{(dir / "nope.tsp").string()}}, ""), Error);
  write_tsp(dir, random_tsp(6, 2));
  write_tsp(dir, random_tsp(6, 1));
  const auto from_dir = load_instance_set(ProblemKind::Tsp, {{dir.string()}}, "");
  REQUIRE(from_dir.size() == 2);
  CHECK(from_dir[0]->name == "rand_tsp_1");
  InstanceSource gen;
  gen.generate = 3;
  gen.size = 8;
  const auto a = load_instance_set(ProblemKind::MaxCut, gen, "");
  const auto b = load_instance_set(ProblemKind::MaxCut, gen, "");
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_instance(*a[i], *b[i]));
}

TEST_CASE("pool files round trip") {
  const auto pool = default_pool(ProblemKind::Mkp);
  const auto back = pool_from_text(pool_to_text(pool));
  REQUIRE(back.size() == pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    CHECK(back[i].id == pool[i].id);
    CHECK(back[i].same_behavior(pool[i]));
  }
}

TEST_CASE("solve: one instance with three repeats") {
  const auto dir = fresh_dir("solve3");
  auto cfg = small_solve_config(dir / "out");
  cfg.instances.paths = {write_tsp(dir, random_tsp(9, 4))};
  std::ostringstream log;
  const auto outcome = cmd_solve(cfg, log);
  CHECK(outcome.records.size() == 3);
  CHECK(outcome.rows.size() == 1);
  CHECK(outcome.failures == 0);
  for (const auto& p : outcome.record_paths) CHECK(fs::exists(p));
  // Missing best-known: cost is reported and the gap column reads n/a.
  CHECK(outcome.rows[0].gaps.empty());
  CHECK(outcome.rows[0].costs.size() == 3);
  const auto table = lines_of((dir / "out" / "solve_table.txt").string());
  REQUIRE(table.size() == 2);
  CHECK(table[1].find("n/a") != std::string::npos);
  CHECK(table[1].find(format_mean_spread(outcome.rows[0].costs)) != std::string::npos);
  CHECK(lines_of((dir / "out" / "solve.csv").string()).size() == 2);
}

TEST_CASE("solve: best-known file yields gaps") {
  const auto dir = fresh_dir("solvegap");
  auto cfg = small_solve_config(dir / "out");
  const auto inst = random_tsp(8, 6);
  cfg.instances.paths = {write_tsp(dir, inst)};
  cfg.repeats = 1;
  write_file((dir / "bk.txt").string(), "rand_tsp_6 100 min hand\n");
  cfg.best_known_path = (dir / "bk.txt").string();
  std::ostringstream log;
  const auto outcome = cmd_solve(cfg, log);
  REQUIRE(outcome.rows[0].gaps.size() == 1);
  CHECK(outcome.rows[0].gaps[0] == doctest::Approx((outcome.rows[0].costs[0] - 100) / 100 * 100));
}

TEST_CASE("solve: time limit reports best-so-far with a timeout flag") {
  const auto dir = fresh_dir("solvetime");
  auto cfg = small_solve_config(dir / "out");
  cfg.instances.paths = {write_tsp(dir, random_tsp(25, 8))};
  cfg.repeats = 1;
  cfg.time_limit = 1e-9;
  std::ostringstream log;
  const auto outcome = cmd_solve(cfg, log);
  REQUIRE(outcome.records.size() == 1);
  CHECK(outcome.records[0].timed_out);
  CHECK(outcome.rows[0].timeouts == 1);
  CHECK(std::isfinite(outcome.records[0].trajectory.terminal_cost));
  const auto v = verify_record(outcome.record_paths[0]);
  CHECK(v.ok);
  CHECK(v.detail.find("wall-clock") != std::string::npos);
}

TEST_CASE("solve: failures are counted and other results kept") {
  const auto dir = fresh_dir("solvefail");
  auto cfg = small_solve_config(dir / "out");
  cfg.instances.paths = {write_tsp(dir, random_tsp(3, 1)), write_tsp(dir, random_tsp(30, 2))};
  cfg.repeats = 1;
  cfg.selector.max_decisions = 1;
  std::ostringstream log;
  const auto outcome = cmd_solve(cfg, log);
  CHECK(outcome.failures == 1);
  CHECK(outcome.records.size() == 1);
  CHECK(outcome.rows[1].failures == 1);
  CHECK(log.str().find("rand_tsp_2") != std::string::npos);
  CHECK(run_args({"solve", "-i", cfg.instances.paths[0], "-i", cfg.instances.paths[1], "--repeats", "1", "--set",
                  "selector.max_decisions=1", "-o", (dir / "cli").string()}) == 3);
}

TEST_CASE("solve records verify by replay and re-execution; tampering is caught") {
  const auto dir = fresh_dir("verify");
  auto cfg = small_solve_config(dir / "out");
  cfg.instances.generate = 2;
  cfg.instances.size = 12;
  cfg.repeats = 1;
  cfg.problem = ProblemKind::MaxCut;
  std::ostringstream log;
  const auto outcome = cmd_solve(cfg, log);
  REQUIRE(outcome.record_paths.size() == 2);
  for (const auto& p : outcome.record_paths) {
    const auto v = verify_record(p);
    CHECK_MESSAGE(v.ok, v.detail);
  }
  auto j = nlohmann::json::parse(read_file(outcome.record_paths[0]));
  j["trajectory"]["terminal_cost"] = j["trajectory"]["terminal_cost"].get<double>() + 1;
  write_file((dir / "bad.json").string(), j.dump());
  CHECK_FALSE(verify_record((dir / "bad.json").string()).ok);
  std::ostringstream out;
  CHECK(cmd_report({(dir / "out").string()}, true, out) == 0);
  CHECK(cmd_report({(dir / "bad.json").string()}, true, out) == 3);
}

TEST_CASE("solve: equal configs give byte-identical run records apart from wall time") {
  const auto dir = fresh_dir("solvedet");
  auto cfg = small_solve_config(dir / "a");
  cfg.problem = ProblemKind::Mkp;
  cfg.instances.generate = 2;
  cfg.instances.size = 12;
  cfg.repeats = 2;
  std::ostringstream log;
  const auto a = cmd_solve(cfg, log);
  cfg.out_dir = (dir / "b").string();
  cfg.jobs = 2;
  const auto b = cmd_solve(cfg, log);
  REQUIRE(a.record_paths.size() == b.record_paths.size());
  for (std::size_t i = 0; i < a.record_paths.size(); ++i) {
    auto ja = nlohmann::json::parse(read_file(a.record_paths[i]));
    auto jb = nlohmann::json::parse(read_file(b.record_paths[i]));
    ja.erase("wall_seconds");
    jb.erase("wall_seconds");
    ja["config"].erase("run.out");
    jb["config"].erase("run.out");
    ja["config"].erase("run.jobs");
    jb["config"].erase("run.jobs");
    CHECK(ja.dump() == jb.dump());
  }
  CHECK(read_file((dir / "a" / "solve.csv").string()) == read_file((dir / "b" / "solve.csv").string()));
}

TEST_CASE("evolve: scripted runs are byte-identical and the report is consistent") {
  const auto dir = fresh_dir("evolve");
  CliConfig cfg;
  cfg.problem = ProblemKind::Tsp;
  cfg.evolution_instances.paths = {write_tsp(dir, random_tsp(20, 89)), write_tsp(dir, random_tsp(20, 90))};
  cfg.validation_instances.paths = {write_tsp(dir, random_tsp(20, 92)), write_tsp(dir, random_tsp(20, 93))};
  cfg.evolution_seeds = {"nearest_neighbor", "farthest_insertion"};
  cfg.evolution_rounds = 2;
  cfg.seed = 3;
  cfg.out_dir = (dir / "a").string();
  std::ostringstream log;
  const auto a = cmd_evolve(cfg, log);
  cfg.out_dir = (dir / "b").string();
  const auto b = cmd_evolve(cfg, log);

  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir / "a" / "genomes")) names.push_back(e.path().filename().string());
  CHECK(names.size() == a.final_pool.size());
  for (const auto& n : names) {
    CHECK(read_file((dir / "a" / "genomes" / n).string()) == read_file((dir / "b" / "genomes" / n).string()));
  }
  CHECK(read_file((dir / "a" / "pool.txt").string()) == read_file((dir / "b" / "pool.txt").string()));
  CHECK(read_file((dir / "a" / "evolution_report.csv").string()) ==
        read_file((dir / "b" / "evolution_report.csv").string()));

  // One report row per round per seed genome attempted.
  const auto rows = lines_of((dir / "a" / "evolution_report.csv").string());
  CHECK(rows.size() == 1 + 2 * 2 * 2);
  CHECK(a.run.rounds.size() == 8);
  for (const auto& r : a.run.rounds) {
    for (std::size_t i = 1; i < r.p_series.size(); ++i) CHECK(r.p_series[i] < r.p_series[i - 1]);
    CHECK(r.accepted_ids.size() == r.p_series.size());
  }
  for (const auto& [id, from] : a.evolved_from) {
    CHECK(a.seed_performance.count(from));
  }
  const auto v = verify_record(a.record_path);
  CHECK_MESSAGE(v.ok, v.detail);
}

TEST_CASE("evolve: evolution and validation sets must be configured and disjoint") {
  const auto dir = fresh_dir("evolvebad");
  CliConfig cfg;
  cfg.out_dir = (dir / "out").string();
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_evolve(cfg, log), Error);
  const auto path = write_tsp(dir, random_tsp(10, 1));
  cfg.evolution_instances.paths = {path};
  cfg.validation_instances.paths = {path};
  CHECK_THROWS_AS(cmd_evolve(cfg, log), Error);
}

TEST_CASE("evolve: an unavailable live advisor degrades only with fallback") {
  const auto dir = fresh_dir("evolvefb");
  CliConfig cfg;
  cfg.evolution_instances.paths = {write_tsp(dir, random_tsp(20, 89))};
  cfg.validation_instances.paths = {write_tsp(dir, random_tsp(20, 92))};
  cfg.evolution_seeds = {"nearest_neighbor"};
  cfg.advisor_backend = "live";
  cfg.advisor_timeout = 0.5;
  cfg.advisor_retries = 0;
  cfg.out_dir = (dir / "out").string();
  ::setenv("HH_ADVISOR_URL", "http://127.0.0.1:1", 1);
  std::ostringstream log;
  const auto strict = cmd_evolve(cfg, log);
  CHECK(strict.run.rounds[0].diagnostic.size() > 0);
  cfg.advisor_fallback = true;
  cfg.out_dir = (dir / "fb").string();
  const auto fb = cmd_evolve(cfg, log);
  cfg.advisor_backend = "scripted";
  cfg.advisor_fallback = false;
  cfg.out_dir = (dir / "scripted").string();
  const auto scripted = cmd_evolve(cfg, log);
  CHECK(read_file((dir / "fb" / "pool.txt").string()) == read_file((dir / "scripted" / "pool.txt").string()));
  ::unsetenv("HH_ADVISOR_URL");
}

TEST_CASE("collect: counts by kind, schema header, empty input") {
  const auto dir = fresh_dir("collect");
  CliConfig cfg;
  cfg.problem = ProblemKind::Tsp;
  cfg.instances.generate = 15;
  cfg.instances.size = 10;
  cfg.selector.m_steps = 1;
  cfg.selector.rollouts_per_candidate = 1;
  cfg.rewards.group_size = 2;
  cfg.greedy_mix = 0.5;
  cfg.out_dir = (dir / "out").string();
  std::ostringstream log;
  const auto outcome = cmd_collect(cfg, log);
  REQUIRE(outcome.summary.records >= 100);
  CHECK(outcome.greedy + outcome.stochastic == outcome.summary.records);
  const double frac = static_cast<double>(outcome.greedy) / static_cast<double>(outcome.summary.records);
  CHECK(frac >= 0.4);
  CHECK(frac <= 0.6);
  CHECK(log.str().find(std::to_string(outcome.greedy) + " greedy") != std::string::npos);

  const auto lines = lines_of(outcome.path);
  REQUIRE(lines.size() == outcome.summary.records + 1);
  const auto header = nlohmann::json::parse(lines[0]);
  CHECK(header["schema"] == "hh-offline-v1");
  CHECK(header["problem"] == "tsp");
  CHECK(header["pool"].size() == default_pool(ProblemKind::Tsp).size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto j = nlohmann::json::parse(lines[i]);
    for (const char* key : {"instance", "decision", "kind", "features", "pool_scores", "chosen", "proposals"}) {
      CHECK_MESSAGE(j.contains(key), key);
    }
  }

  cfg.instances.generate = 0;
  cfg.out_dir = (dir / "empty").string();
  std::ostringstream warn;
  const auto empty = cmd_collect(cfg, warn);
  CHECK(empty.summary.records == 0);
  CHECK(lines_of(empty.path).size() == 1);
  CHECK(warn.str().find("warning") != std::string::npos);
}

TEST_CASE("bench variants") {
  CHECK(parse_variant("seed=default:mc").name == "seed");
  CHECK(parse_variant("evolved=pools/x.txt:random").pool_source == "pools/x.txt");
  CHECK(parse_variant("pool.txt").selector == "mc");
  CHECK_THROWS_AS(parse_variant("a=default:greedy"), Error);
}

TEST_CASE("bench: matched seeds, gap columns and an average row") {
  const auto dir = fresh_dir("bench");
  CliConfig cfg;
  cfg.problem = ProblemKind::Tsp;
  std::vector<InstancePtr> insts{random_tsp(10, 1), random_tsp(10, 2), random_tsp(10, 3)};
  std::string bk;
  for (const auto& inst : insts) {
    cfg.instances.paths.push_back(write_tsp(dir, inst));
    bk += inst->name + " 300 min\n";
  }
  write_file((dir / "bk.txt").string(), bk);
  cfg.best_known_path = (dir / "bk.txt").string();
  cfg.repeats = 2;
  cfg.selector.rollouts_per_candidate = 3;
  cfg.out_dir = (dir / "out").string();
  std::ostringstream log;

  cfg.bench_variants = {"only=default:mc"};
  CHECK_THROWS_AS(cmd_bench(cfg, log), Error);

  write_file((dir / "evolved.txt").string(), pool_to_text(default_pool(ProblemKind::Tsp)));
  cfg.bench_variants = {"seed=default:mc", "evolved=" + (dir / "evolved.txt").string() + ":mc", "rnd=default:random"};
  const auto outcome = cmd_bench(cfg, log);
  const auto csv = lines_of(outcome.csv_path);
  CHECK(csv.size() == 1 + insts.size() + 1);
  CHECK(csv[0] == "instance,seed_cost,evolved_cost,rnd_cost,seed_gap,evolved_gap,rnd_gap");
  CHECK(csv.back().rfind("average,", 0) == 0);
  for (std::size_t i = 0; i < insts.size(); ++i) {
    // Same pool and selector under matched seeds: identical columns.
    CHECK(outcome.costs[i][0] == outcome.costs[i][1]);
    REQUIRE(outcome.gaps[i][0]);
    CHECK(*outcome.gaps[i][0] == *outcome.gaps[i][1]);
  }
  CHECK(fs::exists(dir / "out" / "bench.txt"));
}

TEST_CASE("command line exit codes") {
  const auto dir = fresh_dir("exit");
  CHECK(run_args({}) == 2);
  CHECK(run_args({"--help"}) == 0);
  CHECK(run_args({"solve", "--problem", "vrp"}) == 2);
  CHECK(run_args({"solve", "-i", (dir / "missing.tsp").string()}) == 2);
  CHECK(run_args({"solve", "--set", "run.repeats"}) == 2);
  CHECK(run_args({"report", (dir / "missing").string()}) == 2);
  write_file((dir / "c.toml").string(), "[run]\nproblem = \"mkp\"\nrepeats = 1\n[instances]\ngenerate = 1\nsize = 8\n");
  CHECK(run_args({"solve", "-c", (dir / "c.toml").string(), "--seed", "4", "-o", (dir / "out").string()}) == 0);
  const auto rec = run_record_from_json(read_file((dir / "out" / "runs").string() + "/" +
                                                  fs::directory_iterator(dir / "out" / "runs")->path().filename().string()));
  CHECK(rec.instance->kind == ProblemKind::Mkp);
  CHECK(config_from_snapshot(rec.config_json).seed == 4);
  CHECK(run_args({"report", "--verify", (dir / "out").string()}) == 0);
}
