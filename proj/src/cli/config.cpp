#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>

#include <fnmatch.h>

#include <json.hpp>

#include "hh/cli.hpp"
#include "hh/rng.hpp"

namespace hh::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& raw) {
  const std::string t = trim(raw);
  if (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) {
    return t.substr(1, t.size() - 2);
  }
  return t;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* want) {
  throw Error(Errc::ConfigError, key + ": expected " + want + ", got '" + value + "'");
}

long long as_int(const std::string& key, const std::string& value, long long lo) {
  const std::string t = unquote(value);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(t, &used);
    if (used != t.size() || v < lo) bad(key, value, lo > 0 ? "a positive integer" : "an integer >= 0");
    return v;
  } catch (const std::logic_error&) {
    bad(key, value, "an integer");
  }
}

std::uint64_t as_u64(const std::string& key, const std::string& value) {
  const std::string t = unquote(value);
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(t, &used, 0);
    if (used != t.size() || t.front() == '-') bad(key, value, "an unsigned integer");
    return v;
  } catch (const std::logic_error&) {
    bad(key, value, "an unsigned integer");
  }
}

double as_double(const std::string& key, const std::string& value) {
  const std::string t = unquote(value);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v)) bad(key, value, "a number");
    return v;
  } catch (const std::logic_error&) {
    bad(key, value, "a number");
  }
}

bool as_bool(const std::string& key, const std::string& value) {
  const std::string t = unquote(value);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  bad(key, value, "true or false");
}

// `[a, "b"]` or a bare comma list.
std::vector<std::string> as_list(const std::string& value) {
  std::string t = trim(value);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw Error(Errc::ConfigError, "unterminated list: " + value);
    t = t.substr(1, t.size() - 2);
  }
  std::vector<std::string> out;
  std::string item;
  char quote = 0;
  for (char c : t) {
    if (quote) {
      if (c == quote) quote = 0;
      item += c;
    } else if (c == '"' || c == '\'') {
      quote = c;
      item += c;
    } else if (c == ',') {
      if (!trim(item).empty()) out.push_back(unquote(item));
      item.clear();
    } else {
      item += c;
    }
  }
  if (!trim(item).empty()) out.push_back(unquote(item));
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string list_text(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + quoted(items[i]);
  return out + "]";
}

struct Field {
  std::string key;
  std::function<void(CliConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const CliConfig&)> get;
};

#define HH_INT(KEY, EXPR, LO)                                                              \
  Field{KEY, [](CliConfig& c, const std::string& k, const std::string& v) {                 \
          EXPR = static_cast<std::remove_reference_t<decltype(EXPR)>>(as_int(k, v, LO));    \
        },                                                                                  \
        [](const CliConfig& c) { return std::to_string(EXPR); }}
#define HH_DBL(KEY, EXPR)                                                                   \
  Field{KEY, [](CliConfig& c, const std::string& k, const std::string& v) { EXPR = as_double(k, v); }, \
        [](const CliConfig& c) { return num(EXPR); }}
#define HH_BOOL(KEY, EXPR)                                                                  \
  Field{KEY, [](CliConfig& c, const std::string& k, const std::string& v) { EXPR = as_bool(k, v); }, \
        [](const CliConfig& c) { return std::string(EXPR ? "true" : "false"); }}
#define HH_STR(KEY, EXPR)                                                                   \
  Field{KEY, [](CliConfig& c, const std::string&, const std::string& v) { EXPR = unquote(v); }, \
        [](const CliConfig& c) { return quoted(EXPR); }}
#define HH_LIST(KEY, EXPR)                                                                  \
  Field{KEY, [](CliConfig& c, const std::string&, const std::string& v) { EXPR = as_list(v); }, \
        [](const CliConfig& c) { return list_text(EXPR); }}
#define HH_U64(KEY, EXPR)                                                                   \
  Field{KEY, [](CliConfig& c, const std::string& k, const std::string& v) { EXPR = as_u64(k, v); }, \
        [](const CliConfig& c) { return std::to_string(EXPR); }}

std::vector<Field> source_fields(const char* prefix, InstanceSource CliConfig::*member) {
  const std::string p(prefix);
  std::vector<Field> out;
  out.push_back({p + ".paths",
                 [member](CliConfig& c, const std::string&, const std::string& v) { (c.*member).paths = as_list(v); },
                 [member](const CliConfig& c) { return list_text((c.*member).paths); }});
  out.push_back({p + ".generate",
                 [member](CliConfig& c, const std::string& k, const std::string& v) {
                   (c.*member).generate = static_cast<int>(as_int(k, v, 0));
                 },
                 [member](const CliConfig& c) { return std::to_string((c.*member).generate); }});
  out.push_back({p + ".size",
                 [member](CliConfig& c, const std::string& k, const std::string& v) {
                   (c.*member).size = static_cast<int>(as_int(k, v, 2));
                 },
                 [member](const CliConfig& c) { return std::to_string((c.*member).size); }});
  out.push_back({p + ".seed",
                 [member](CliConfig& c, const std::string& k, const std::string& v) { (c.*member).seed = as_u64(k, v); },
                 [member](const CliConfig& c) { return std::to_string((c.*member).seed); }});
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f{
        Field{"run.problem",
              [](CliConfig& c, const std::string& k, const std::string& v) {
                const auto kind = problem_kind_from_string(unquote(v));
                if (!kind) bad(k, v, "tsp, mkp or maxcut");
                c.problem = *kind;
              },
              [](const CliConfig& c) { return quoted(to_string(c.problem)); }},
        HH_U64("run.seed", c.seed),
        HH_STR("run.out", c.out_dir),
        HH_INT("run.repeats", c.repeats, 1),
        HH_DBL("run.time_limit", c.time_limit),
        HH_INT("run.jobs", c.jobs, 1),
        HH_STR("run.best_known", c.best_known_path),
        HH_STR("pool.source", c.pool_source),
        HH_INT("selector.m_steps", c.selector.m_steps, 1),
        HH_INT("selector.rollouts", c.selector.rollouts_per_candidate, 0),
        HH_INT("selector.max_decisions", c.selector.max_decisions, 0),
        Field{"selector.filter",
              [](CliConfig& c, const std::string& k, const std::string& v) {
                const auto mode = filter_mode_from_string(unquote(v));
                if (!mode) bad(k, v, "passthrough, advisor or static_topk");
                c.selector.filter_mode = *mode;
              },
              [](const CliConfig& c) { return quoted(to_string(c.selector.filter_mode)); }},
        HH_INT("selector.static_topk", c.selector.static_topk, 1),
        HH_BOOL("selector.crn", c.selector.common_random_numbers),
        HH_BOOL("selector.parallel", c.selector.parallel),
        HH_INT("selector.context_budget", c.selector.context_budget, 1),
        HH_INT("evolution.trials", c.evolution.max_perturbation_trials, 1),
        HH_DBL("evolution.ratio", c.evolution.perturbation_ratio),
        HH_INT("evolution.refine_iterations", c.evolution.max_refinement_iterations, 0),
        HH_INT("evolution.parse_retries", c.evolution.parse_retries, 0),
        HH_BOOL("evolution.random_bootstrap", c.evolution.random_bootstrap),
        HH_BOOL("evolution.parallel", c.evolution.parallel),
        HH_INT("evolution.context_budget", c.evolution.context_budget, 1),
        HH_INT("evolution.rounds", c.evolution_rounds, 1),
        HH_LIST("evolution.seeds", c.evolution_seeds),
        HH_BOOL("evolution.fallback", c.advisor_fallback),
        Field{"rewards.n_pos",
              [](CliConfig& c, const std::string& k, const std::string& v) {
                if (unquote(v) == "auto") c.rewards.n_pos.reset();
                else c.rewards.n_pos = static_cast<int>(as_int(k, v, 1));
              },
              [](const CliConfig& c) {
                return c.rewards.n_pos ? std::to_string(*c.rewards.n_pos) : quoted("auto");
              }},
        Field{"rewards.n_neg",
              [](CliConfig& c, const std::string& k, const std::string& v) {
                if (unquote(v) == "auto") c.rewards.n_neg.reset();
                else c.rewards.n_neg = static_cast<int>(as_int(k, v, 1));
              },
              [](const CliConfig& c) {
                return c.rewards.n_neg ? std::to_string(*c.rewards.n_neg) : quoted("auto");
              }},
        HH_DBL("rewards.r_p", c.rewards.r_p),
        HH_DBL("rewards.r_n", c.rewards.r_n),
        HH_DBL("rewards.r_l", c.rewards.r_l),
        HH_DBL("rewards.r_f", c.rewards.r_f),
        HH_DBL("rewards.lambda_por", c.rewards.lambda_por),
        HH_DBL("rewards.lambda_cpr", c.rewards.lambda_cpr),
        HH_DBL("rewards.lambda_base", c.rewards.lambda_base),
        Field{"rewards.cpr_rel_tol",
              [](CliConfig& c, const std::string& k, const std::string& v) {
                if (unquote(v) == "sig4") c.rewards.cpr_rel_tol.reset();
                else c.rewards.cpr_rel_tol = as_double(k, v);
              },
              [](const CliConfig& c) {
                return c.rewards.cpr_rel_tol ? num(*c.rewards.cpr_rel_tol) : quoted("sig4");
              }},
        HH_INT("rewards.group_size", c.rewards.group_size, 2),
        HH_DBL("rewards.greedy_mix", c.greedy_mix),
        HH_STR("advisor.backend", c.advisor_backend),
        HH_STR("advisor.transcript", c.transcript),
        HH_STR("advisor.record", c.record_transcript),
        Field{"advisor.call_budget",
              [](CliConfig& c, const std::string& k, const std::string& v) {
                if (unquote(v) == "unlimited") c.call_budget.reset();
                else c.call_budget = static_cast<long>(as_int(k, v, 0));
              },
              [](const CliConfig& c) {
                return c.call_budget ? std::to_string(*c.call_budget) : quoted("unlimited");
              }},
        HH_DBL("advisor.timeout", c.advisor_timeout),
        HH_INT("advisor.retries", c.advisor_retries, 0),
        HH_DBL("advisor.temperature", c.evolution.decoding.temperature),
        HH_DBL("advisor.top_p", c.evolution.decoding.top_p),
        HH_INT("advisor.max_tokens", c.evolution.decoding.max_tokens, 1),
        HH_LIST("bench.variants", c.bench_variants),
    };
    for (auto&& extra : {source_fields("instances", &CliConfig::instances),
                         source_fields("evolution.evo", &CliConfig::evolution_instances),
                         source_fields("evolution.val", &CliConfig::validation_instances)}) {
      f.insert(f.end(), extra.begin(), extra.end());
    }
    return f;
  }();
  return table;
}

#undef HH_INT
#undef HH_DBL
#undef HH_BOOL
#undef HH_STR
#undef HH_LIST
#undef HH_U64

void check(const CliConfig& c) {
  if (c.advisor_backend != "live" && c.advisor_backend != "scripted" && c.advisor_backend != "replay") {
    throw Error(Errc::ConfigError, "advisor.backend must be live, scripted or replay");
  }
  if (c.greedy_mix < 0 || c.greedy_mix > 1) throw Error(Errc::ConfigError, "rewards.greedy_mix must be in [0, 1]");
  if (c.time_limit < 0) throw Error(Errc::ConfigError, "run.time_limit must be >= 0");
  if (c.advisor_timeout <= 0) throw Error(Errc::ConfigError, "advisor.timeout must be > 0");
  if (c.evolution.perturbation_ratio <= 0 || c.evolution.perturbation_ratio > 1) {
    throw Error(Errc::ConfigError, "evolution.ratio must be in (0, 1]");
  }
}

std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<fs::path> expand_path(const std::string& spec) {
  const fs::path p(spec);
  if (spec.find_first_of("*?[") != std::string::npos) {
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    if (!fs::is_directory(dir)) throw Error(Errc::ConfigError, "no such directory: " + dir.string());
    std::vector<fs::path> out;
    const std::string pattern = p.filename().string();
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() &&
          fnmatch(pattern.c_str(), entry.path().filename().c_str(), 0) == 0) {
        out.push_back(entry.path());
      }
    }
    if (out.empty()) throw Error(Errc::ConfigError, "pattern matches no files: " + spec);
    std::sort(out.begin(), out.end());
    return out;
  }
  if (fs::is_directory(p)) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_regular_file()) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  if (!fs::is_regular_file(p)) throw Error(Errc::ConfigError, "no such instance file: " + spec);
  return {p};
}

// Unavailable backends hand the request to the scripted advisor.
class FallbackAdvisor : public Advisor {
 public:
  explicit FallbackAdvisor(AdvisorPtr primary) : primary_(std::move(primary)) {}
  std::string complete(const AdvisorRequest& request) override {
    try {
      return primary_->complete(request);
    } catch (const Error& e) {
      switch (e.code()) {
        case Errc::AdvisorUnavailable:
        case Errc::Timeout:
        case Errc::HttpError:
        case Errc::BudgetExhausted:
        case Errc::TranscriptMiss: return scripted_.complete(request);
        default: throw;
      }
    }
  }
  std::string backend_name() const override { return primary_->backend_name() + "+scripted"; }

 private:
  AdvisorPtr primary_;
  ScriptedAdvisor scripted_;
};

}  // namespace

void set_option(CliConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, key, value);
      return;
    }
  }
  throw Error(Errc::ConfigError, "unknown config key '" + key + "'");
}

std::map<std::string, std::string> config_entries(const CliConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[f.key] = f.get(cfg);
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

CliConfig parse_config(const std::string& text, CliConfig base) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[' && t.back() == ']' && t.find('=') == std::string::npos) {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::ConfigError, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      set_option(base, full, t.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, "config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  check(base);
  return base;
}

std::string config_snapshot_json(const CliConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : config_entries(cfg)) j[k] = v;
  return j.dump();
}

CliConfig config_from_snapshot(const std::string& json) {
  const auto j = nlohmann::json::parse(json, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::ConfigError, "config snapshot is not a JSON object");
  CliConfig cfg;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw Error(Errc::ConfigError, "config snapshot value for " + k + " is not text");
    set_option(cfg, k, v.get<std::string>());
  }
  check(cfg);
  return cfg;
}

std::vector<InstancePtr> load_instance_set(ProblemKind kind, const InstanceSource& source,
                                           const std::string& best_known_path) {
  BestKnownRegistry registry;
  if (!best_known_path.empty()) registry = BestKnownRegistry::load(best_known_path);
  std::vector<InstancePtr> out;
  for (const auto& spec : source.paths) {
    for (const auto& path : expand_path(spec)) {
      for (auto& inst : load_instances(path.string(), kind)) out.push_back(std::move(inst));
    }
  }
  for (int i = 0; i < source.generate; ++i) {
    out.push_back(generate_instance(kind, source.size, derive_seed(source.seed, 0x6e, static_cast<std::uint64_t>(i))));
  }
  for (auto& inst : out) inst = registry.apply(inst);
  return out;
}

std::string pool_to_text(const std::vector<HeuristicGenome>& pool) {
  std::string out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i) out += "---\n";
    out += genome_to_text(pool[i]);
  }
  return out;
}

std::vector<HeuristicGenome> pool_from_text(const std::string& text) {
  std::vector<HeuristicGenome> pool;
  std::istringstream in(text);
  std::string line, chunk;
  auto flush = [&] {
    if (!trim(chunk).empty()) pool.push_back(genome_from_text(chunk));
    chunk.clear();
  };
  while (std::getline(in, line)) {
    if (trim(line) == "---") flush();
    else chunk += line + "\n";
  }
  flush();
  return pool;
}

std::vector<HeuristicGenome> load_pool(ProblemKind kind, const std::string& source) {
  if (source.empty() || source == "default") return default_pool(kind);
  auto pool = pool_from_text(read_file(source));
  if (pool.empty()) throw Error(Errc::ConfigError, "pool file has no genomes: " + source);
  for (const auto& g : pool) {
    if (g.info().problem != kind) {
      throw Error(Errc::ConfigError, "genome " + g.id + " belongs to another problem");
    }
  }
  return pool;
}

AdvisorPtr make_advisor(const CliConfig& cfg, bool fallback) {
  AdvisorPtr advisor;
  if (cfg.advisor_backend == "scripted") {
    advisor = std::make_shared<ScriptedAdvisor>();
  } else if (cfg.advisor_backend == "replay") {
    if (cfg.transcript.empty()) throw Error(Errc::ConfigError, "replay backend needs advisor.transcript");
    advisor = std::make_shared<ReplayAdvisor>(load_transcript(cfg.transcript));
  } else if (cfg.advisor_backend == "live") {
    auto live = LiveAdvisorConfig::from_env();
    live.timeout = std::chrono::milliseconds(static_cast<long long>(cfg.advisor_timeout * 1000));
    live.max_retries = cfg.advisor_retries;
    live.call_budget = cfg.call_budget;
    advisor = std::make_shared<LiveAdvisor>(live);
  } else {
    throw Error(Errc::ConfigError, "unknown advisor backend " + cfg.advisor_backend);
  }
  if (fallback) advisor = std::make_shared<FallbackAdvisor>(advisor);
  if (!cfg.record_transcript.empty()) {
    advisor = std::make_shared<RecordingAdvisor>(advisor, cfg.record_transcript);
  }
  return advisor;
}

std::string format_mean_spread(const std::vector<double>& values, int precision) {
  if (values.empty()) return "n/a";
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
  char buf[96];
  if (sd == 0) {
    std::snprintf(buf, sizeof buf, "%.*f", precision, mean);
  } else {
    std::snprintf(buf, sizeof buf, "%.*f ± %.*f", precision, mean, precision, sd);
  }
  return buf;
}

}  // namespace hh::cli
