#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hh/heuristics.hpp"

namespace hh {

namespace {

std::vector<ParamSpec> periodic_2opt_params() {
  return {{"apply_2opt_frequency", 5, 1, 50, true}};
}

std::vector<FamilyInfo> build_catalog() {
  const auto tsp = ProblemKind::Tsp;
  const auto mkp = ProblemKind::Mkp;
  const auto cut = ProblemKind::MaxCut;
  const FlagSpec periodic{"periodic_2opt", false};
  const FlagSpec swap_pass{"final_swap_pass", false};
  const FlagSpec finish{"local_search_finish", false};
  std::vector<FamilyInfo> c = {
      {Family::NearestNeighbor, "nearest_neighbor", tsp, true,
       {{"future_cost_weight", 0, 0, 4},
        {"threshold_factor", 0.70, 0, 2},
        {"percentage_range", 0.20, 0, 2},
        {"apply_2opt_frequency", 5, 1, 50, true}},
       {{"sub_central_start", false},
        {"best_position_insertion", false},
        {"limit_candidates", false},
        periodic},
       "Extend the tour with the unvisited node closest to the last node.",
       1},
      {Family::CheapestInsertion, "cheapest_insertion", tsp, true,
       periodic_2opt_params(), {periodic},
       "Insert the (node, position) pair with the smallest detour cost.", 4},
      {Family::FarthestInsertion, "farthest_insertion", tsp, true,
       periodic_2opt_params(), {periodic},
       "Insert the node farthest from the tour at its cheapest position.", 3},
      {Family::NearestInsertion, "nearest_insertion", tsp, true,
       periodic_2opt_params(), {periodic},
       "Insert the node nearest to the tour at its cheapest position.", 3},
      {Family::RandomPairwiseInsertion, "random_pairwise_insertion", tsp, true,
       periodic_2opt_params(), {periodic},
       "Draw two unvisited nodes, insert the one with the cheaper detour.", 2},
      {Family::GreedyEdge, "greedy_edge", tsp, true, periodic_2opt_params(),
       {periodic},
       "Follow the greedy-matching tour built from the shortest edges.", 5},
      {Family::Grasp, "grasp", tsp, true,
       {{"rcl_alpha", 0.3, 0, 1}, {"apply_2opt_frequency", 5, 1, 50, true}},
       {periodic},
       "Append a random node from the restricted candidate list.", 1},
      {Family::InsertionGeneric, "insertion_generic", tsp, true,
       periodic_2opt_params(), {periodic},
       "Insert unvisited nodes in id order at their cheapest position.", 2},
      {Family::TwoOpt, "two_opt", tsp, false, {}, {{"first_improvement", false}},
       "Reverse the tour segment giving the largest length reduction.", 6},
      {Family::ThreeOpt, "three_opt", tsp, false,
       {{"max_segment_length", 3, 1, 10, true}}, {},
       "Best segment reversal or segment relocation move.", 7},

      {Family::GreedyByProfit, "greedy_by_profit", mkp, true, {}, {swap_pass},
       "Add the most profitable item that fits.", 1},
      {Family::GreedyByWeight, "greedy_by_weight", mkp, true, {}, {swap_pass},
       "Add the lightest item that fits.", 1},
      {Family::GreedyByDensity, "greedy_by_density", mkp, true,
       {{"profit_exponent", 1, 0.25, 4}}, {swap_pass},
       "Add the fitting item with the best profit per unit weight.", 1},
      {Family::GreedyByProfitWeightRatio, "greedy_by_profit_weight_ratio", mkp,
       true, {{"profit_exponent", 1, 0.25, 4}}, {swap_pass},
       "Add the item with the best profit per capacity-normalized weight.", 2},
      {Family::GreedyByResourceBalance, "greedy_by_resource_balance", mkp, true,
       {{"profit_exponent", 1, 0.25, 4}}, {swap_pass},
       "Add the item with the best profit relative to its tightest resource.",
       2},
      {Family::GreedyByLeastRemainingCapacity,
       "greedy_by_least_remaining_capacity", mkp, true, {}, {swap_pass},
       "Add the item leaving the least normalized remaining capacity.", 2},
      {Family::SingleSwap, "single_swap", mkp, false, {}, {},
       "First improving exchange of one included and one excluded item.", 4},
      {Family::KFlip, "k_flip", mkp, false, {{"k", 2, 1, 2, true}}, {},
       "Best improving flip of at most k items.", 5},
      {Family::BlockFlip, "block_flip", mkp, false,
       {{"block_length", 3, 1, 10, true}}, {},
       "Best improving flip of a contiguous block of items.", 4},
      {Family::TwoOptMkp, "two_opt_mkp", mkp, false, {}, {},
       "Best improving exchange of one included and one excluded item.", 5},
      {Family::GreedyImprovement, "greedy_improvement", mkp, false, {}, {},
       "Add the most profitable fitting item, else the best exchange.", 5},

      {Family::MostWeightNeighbors, "most_weight_neighbors", cut, true, {},
       {finish},
       "Assign the node most strongly tied to assigned nodes.", 2},
      {Family::HighestWeightEdge, "highest_weight_edge", cut, true, {}, {finish},
       "Split the heaviest edge with an unassigned endpoint.", 2},
      {Family::BalancedCut, "balanced_cut", cut, true, {}, {finish},
       "Assign the best node to the smaller side.", 2},
      {Family::HighestDeltaNode, "highest_delta_node", cut, true, {}, {finish},
       "Assign the (node, side) with the largest cut gain.", 2},
      {Family::HighestDeltaEdge, "highest_delta_edge", cut, true, {}, {finish},
       "Seed the heaviest unassigned edge, else the largest-gain node.", 3},
      {Family::GreedySwap, "greedy_swap", cut, false, {}, {},
       "First improving exchange of nodes across the cut.", 5},
      {Family::MultiSwap2, "multi_swap_2", cut, false, {}, {},
       "Best improving move of one node or exchange of two nodes.", 6},
      {Family::SimulatedAnnealing, "simulated_annealing", cut, false,
       {{"cooling_ratio", 0.95, 0.5, 0.999},
        {"proposals_per_call", 10, 1, 100, true}},
       {},
       "Random node moves under a geometric annealing schedule.", 3},
  };
  return c;
}

const std::vector<FamilyInfo>& catalog() {
  static const std::vector<FamilyInfo> c = build_catalog();
  return c;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const FamilyInfo& family_info(Family family) {
  return catalog()[static_cast<std::size_t>(family)];
}

const std::vector<Family>& families_for(ProblemKind kind) {
  static const auto lists = [] {
    std::vector<std::vector<Family>> out(3);
    for (const auto& info : catalog()) {
      out[static_cast<std::size_t>(info.problem)].push_back(info.family);
    }
    return out;
  }();
  return lists[static_cast<std::size_t>(kind)];
}

std::optional<Family> family_from_name(std::string_view name) {
  for (const auto& info : catalog()) {
    if (info.name == name) return info.family;
  }
  return std::nullopt;
}

double HeuristicGenome::param(const std::string& name) const {
  const auto it = params.find(name);
  if (it != params.end()) return it->second;
  for (const auto& p : info().params) {
    if (p.name == name) return p.default_value;
  }
  throw Error(Errc::UnknownTarget, info().name + " has no param " + name);
}

bool HeuristicGenome::flag(const std::string& name) const {
  const auto it = flags.find(name);
  if (it != flags.end()) return it->second;
  for (const auto& f : info().flags) {
    if (f.name == name) return f.default_value;
  }
  throw Error(Errc::UnknownTarget, info().name + " has no flag " + name);
}

bool HeuristicGenome::same_behavior(const HeuristicGenome& other) const {
  return family == other.family && params == other.params &&
         flags == other.flags;
}

std::string genome_id(const HeuristicGenome& genome) {
  std::string canonical = genome.info().name;
  for (const auto& [k, v] : genome.params) canonical += ";" + k + "=" + num(v);
  for (const auto& [k, v] : genome.flags) canonical += ";" + k + "=" + (v ? "1" : "0");
  char suffix[8];
  std::snprintf(suffix, sizeof suffix, "%04x",
                static_cast<unsigned>(fnv1a64(canonical) & 0xffffu));
  return genome.info().name + "_" + suffix;
}

HeuristicGenome make_genome(Family family) {
  HeuristicGenome g;
  g.family = family;
  for (const auto& p : family_info(family).params) g.params[p.name] = p.default_value;
  for (const auto& f : family_info(family).flags) g.flags[f.name] = f.default_value;
  g.id = genome_id(g);
  return g;
}

std::vector<HeuristicGenome> default_pool(ProblemKind kind) {
  std::vector<HeuristicGenome> pool;
  for (Family f : families_for(kind)) pool.push_back(make_genome(f));
  return pool;
}

bool is_edit_target(Family family, std::string_view name) {
  const auto& info = family_info(family);
  return std::any_of(info.params.begin(), info.params.end(),
                     [&](const ParamSpec& p) { return p.name == name; }) ||
         std::any_of(info.flags.begin(), info.flags.end(),
                     [&](const FlagSpec& f) { return f.name == name; });
}

HeuristicGenome mutate_genome(const HeuristicGenome& genome,
                              const StrategyEdit& edit) {
  if (edit.target != genome.family) {
    throw Error(Errc::UnknownTarget, "strategy targets " +
                                         family_info(edit.target).name +
                                         ", genome is " + genome.info().name);
  }
  HeuristicGenome out = genome;
  const auto& info = genome.info();
  for (const auto& e : edit.edits) {
    const auto param = std::find_if(info.params.begin(), info.params.end(),
                                    [&](const ParamSpec& p) { return p.name == e.target; });
    if (param != info.params.end()) {
      double v = e.value;
      if (!std::isfinite(v)) {
        throw Error(Errc::UnknownTarget, "non-finite value for " + e.target);
      }
      if (param->integral) v = std::round(v);
      const double clamped = std::clamp(v, param->lo, param->hi);
      if (clamped != v) out.lineage.push_back("clamp:" + e.target);
      out.params[e.target] = clamped;
      continue;
    }
    const auto flag = std::find_if(info.flags.begin(), info.flags.end(),
                                   [&](const FlagSpec& f) { return f.name == e.target; });
    if (flag != info.flags.end()) {
      out.flags[e.target] = e.value != 0.0;
      continue;
    }
    throw Error(Errc::UnknownTarget,
                info.name + " declares no param or flag '" + e.target + "'");
  }
  if (!edit.strategy_id.empty()) out.lineage.push_back(edit.strategy_id);
  out.id = genome_id(out);
  return out;
}

std::string genome_to_text(const HeuristicGenome& genome) {
  std::ostringstream out;
  out << "id = " << genome.id << "\n";
  out << "family = " << genome.info().name << "\n";
  for (const auto& [k, v] : genome.params) out << "param." << k << " = " << num(v) << "\n";
  for (const auto& [k, v] : genome.flags) out << "flag." << k << " = " << (v ? "true" : "false") << "\n";
  std::string lineage;
  for (const auto& l : genome.lineage) lineage += (lineage.empty() ? "" : ";") + l;
  out << "lineage = " << lineage << "\n";
  return out.str();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

HeuristicGenome genome_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<Family> family;
  std::string id;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> lineage;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::ConfigError, "genome line without '=': " + t);
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "family") {
      family = family_from_name(value);
      if (!family) throw Error(Errc::UnknownTarget, "unknown family " + value);
    } else if (key == "id") {
      id = value;
    } else if (key == "lineage") {
      std::istringstream parts(value);
      std::string part;
      while (std::getline(parts, part, ';')) {
        if (!trim(part).empty()) lineage.push_back(trim(part));
      }
    } else {
      entries.emplace_back(key, value);
    }
  }
  if (!family) throw Error(Errc::ConfigError, "genome text has no family");
  HeuristicGenome g = make_genome(*family);
  for (const auto& [key, value] : entries) {
    if (key.rfind("param.", 0) == 0) {
      const std::string name = key.substr(6);
      if (!g.params.count(name)) throw Error(Errc::UnknownTarget, name);
      g.params[name] = std::stod(value);
    } else if (key.rfind("flag.", 0) == 0) {
      const std::string name = key.substr(5);
      if (!g.flags.count(name)) throw Error(Errc::UnknownTarget, name);
      g.flags[name] = value == "true" || value == "1";
    } else {
      throw Error(Errc::ConfigError, "unknown genome key " + key);
    }
  }
  g.lineage = std::move(lineage);
  g.id = id.empty() ? genome_id(g) : id;
  return g;
}

std::string genome_to_json(const HeuristicGenome& genome) {
  nlohmann::json j;
  j["id"] = genome.id;
  j["family"] = genome.info().name;
  j["params"] = genome.params;
  j["flags"] = genome.flags;
  j["lineage"] = genome.lineage;
  return j.dump();
}

}  // namespace hh
