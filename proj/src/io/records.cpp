#include <cctype>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "hh/envs.hpp"
#include "hh/io.hpp"

namespace hh {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Best-known registry

void BestKnownRegistry::set(const std::string& name, BestKnownEntry entry) {
  if (!std::isfinite(entry.value)) {
    throw Error(Errc::ConfigError, "best-known value for " + name + " is not finite");
  }
  entries_[lower(name)] = {name, std::move(entry)};
}

std::optional<BestKnownEntry> BestKnownRegistry::lookup(const std::string& name) const {
  const auto it = entries_.find(lower(name));
  if (it == entries_.end()) return std::nullopt;
  return it->second.second;
}

BestKnownRegistry BestKnownRegistry::parse(std::string_view text) {
  BestKnownRegistry reg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name, value, sense;
    if (!(fields >> name)) continue;
    if (!(fields >> value >> sense)) {
      throw Error(Errc::ConfigError, "best-known line " + std::to_string(lineno) +
                                         ": expected 'name value sense [source]'");
    }
    BestKnownEntry e;
    try {
      std::size_t used = 0;
      e.value = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, "best-known line " + std::to_string(lineno) + ": bad value");
    }
    const auto s = sense_from_string(sense);
    if (!s) throw Error(Errc::ConfigError, "best-known line " + std::to_string(lineno) + ": bad sense");
    e.sense = *s;
    std::getline(fields >> std::ws, e.source);
    while (!e.source.empty() && std::isspace(static_cast<unsigned char>(e.source.back()))) {
      e.source.pop_back();
    }
    reg.set(name, std::move(e));
  }
  return reg;
}

BestKnownRegistry BestKnownRegistry::load(const std::string& path) {
  return parse(read_file(path));
}

std::string BestKnownRegistry::serialize() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [key, named] : entries_) {
    const auto& [name, e] = named;
    out << name << ' ' << e.value << ' ' << to_string(e.sense);
    if (!e.source.empty()) out << ' ' << e.source;
    out << '\n';
  }
  return out.str();
}

void BestKnownRegistry::absorb(const std::vector<InstancePtr>& instances, const std::string& source) {
  for (const auto& inst : instances) {
    if (inst->best_known) set(inst->name, {inst->best_known->value, inst->best_known->sense, source});
  }
}

InstancePtr BestKnownRegistry::apply(const InstancePtr& instance) const {
  const auto e = lookup(instance->name);
  if (!e) return instance;
  if (e->sense != instance->sense()) {
    throw Error(Errc::ConfigError, "best-known sense for " + instance->name + " does not match the problem");
  }
  return with_best_known(instance, {e->value, e->sense});
}

double compute_gap(double v, double v_u, ObjectiveSense sense) {
  if (v_u == 0) throw Error(Errc::ZeroReference, "gap undefined for a zero reference value");
  const double diff = sense == ObjectiveSense::Minimize ? v - v_u : v_u - v;
  return diff / std::abs(v_u) * 100.0;
}

// ---------------------------------------------------------------------------
// Trajectories and run records

namespace {

nlohmann::ordered_json trajectory_json(const Trajectory& traj) {
  nlohmann::ordered_json j;
  j["heuristics"] = traj.heuristic_ids;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : traj.steps) steps.push_back({{"op", to_string(s.op)}, {"h", s.heuristic}});
  j["steps"] = std::move(steps);
  j["seed"] = traj.seed;
  j["terminal_cost"] = traj.terminal_cost;
  return j;
}

Trajectory trajectory_from(const nlohmann::json& j, const ProblemState& start) {
  Trajectory t;
  t.start = start;
  t.heuristic_ids = j.at("heuristics").get<std::vector<std::string>>();
  for (const auto& s : j.at("steps")) {
    TrajectoryStep step;
    step.op = parse_operation(s.at("op").get<std::string>());
    step.heuristic = s.at("h").get<int>();
    if (step.heuristic < -1 || step.heuristic >= static_cast<int>(t.heuristic_ids.size())) {
      throw Error(Errc::ConfigError, "trajectory step refers to an unknown heuristic");
    }
    t.steps.push_back(step);
  }
  t.seed = j.at("seed").get<std::uint64_t>();
  t.terminal_cost = j.at("terminal_cost").get<double>();
  return t;
}

}  // namespace

std::string trajectory_to_json(const Trajectory& traj) { return trajectory_json(traj).dump(); }

Trajectory trajectory_from_json(std::string_view json, const ProblemState& start) {
  try {
    return trajectory_from(nlohmann::json::parse(json), start);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("bad trajectory JSON: ") + e.what());
  }
}

std::string run_record_to_json(const RunRecord& record) {
  const auto& inst = *record.instance;
  nlohmann::ordered_json j;
  j["instance"] = inst.name;
  j["problem"] = to_string(inst.kind);
  j["instance_text"] = serialize_instance(inst);
  if (inst.best_known) {
    j["best_known"] = {{"value", inst.best_known->value}, {"sense", to_string(inst.best_known->sense)}};
  }
  j["config"] = nlohmann::ordered_json::parse(record.config_json);
  j["seed"] = record.seed;
  j["pool"] = record.pool;
  j["trajectory"] = trajectory_json(record.trajectory);
  j["decision_log"] = record.decision_log;
  j["wall_seconds"] = record.wall_seconds;
  j["timed_out"] = record.timed_out;
  if (record.gap) j["gap_percent"] = *record.gap;
  return j.dump(2);
}

RunRecord run_record_from_json(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    const auto kind = problem_kind_from_string(j.at("problem").get<std::string>());
    if (!kind) throw Error(Errc::ConfigError, "run record has an unknown problem kind");
    RunRecord r;
    auto inst = parse_instance(j.at("instance_text").get<std::string>(), *kind,
                               j.at("instance").get<std::string>());
    if (j.contains("best_known")) {
      const auto sense = sense_from_string(j["best_known"].at("sense").get<std::string>());
      if (!sense) throw Error(Errc::ConfigError, "run record has a bad best-known sense");
      inst = with_best_known(inst, {j["best_known"].at("value").get<double>(), *sense});
    } else if (inst->best_known) {
      auto copy = std::make_shared<ProblemInstance>(*inst);
      copy->best_known.reset();
      inst = copy;
    }
    r.instance = inst;
    r.config_json = j.at("config").dump();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.pool = j.value("pool", std::vector<std::string>{});
    r.trajectory = trajectory_from(j.at("trajectory"), initial_state(inst));
    r.decision_log = j.value("decision_log", std::string{});
    r.wall_seconds = j.value("wall_seconds", 0.0);
    r.timed_out = j.value("timed_out", false);
    if (j.contains("gap_percent")) r.gap = j["gap_percent"].get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("bad run record: ") + e.what());
  }
}

}  // namespace hh
