#include <cstdio>
#include <sstream>

#include "hh/advisor.hpp"
#include "hh/envs.hpp"

namespace hh {

namespace detail {
// Generated from assets/prompts at configure time.
const char* embedded_prompt(const char* name);
}  // namespace detail

const char* to_string(AdvisorRole role) {
  switch (role) {
    case AdvisorRole::Evolve: return "evolve";
    case AdvisorRole::Refine: return "refine";
    case AdvisorRole::Filter: return "filter";
    case AdvisorRole::Select: return "select";
  }
  return "?";
}

std::string request_hash(const AdvisorRequest& request) {
  const std::string key = std::string(to_string(request.role)) + "\n" + request.prompt;
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(key)));
  return buf;
}

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    const auto close = text.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    const std::string key = text.substr(open + 2, close - open - 2);
    const auto it = values.find(key);
    out += it != values.end() ? it->second : text.substr(open, close + 2 - open);
    pos = close + 2;
  }
  return out;
}

const std::string& prompt_template(AdvisorRole role) {
  static const std::string evolve = detail::embedded_prompt("evolve");
  static const std::string refine = detail::embedded_prompt("refine");
  static const std::string filter = detail::embedded_prompt("filter");
  static const std::string select = detail::embedded_prompt("select");
  switch (role) {
    case AdvisorRole::Evolve: return evolve;
    case AdvisorRole::Refine: return refine;
    case AdvisorRole::Filter: return filter;
    case AdvisorRole::Select: return select;
  }
  return filter;
}

std::string heuristic_catalog_text(const std::vector<HeuristicGenome>& pool) {
  std::string out;
  for (const auto& g : pool) {
    out += "- " + g.id + ": " + g.info().description + "\n";
  }
  return out;
}

std::string edit_surface_text(const HeuristicGenome& genome) {
  std::string out;
  for (const auto& p : genome.info().params) {
    out += p.name + " = " + format_sig4(genome.param(p.name)) + " [" +
           format_sig4(p.lo) + ", " + format_sig4(p.hi) + "]" +
           (p.integral ? " integer" : "") + "\n";
  }
  for (const auto& f : genome.info().flags) {
    out += f.name + " = " + (genome.flag(f.name) ? "true" : "false") + " [true, false]\n";
  }
  if (out.empty()) out = "(none)\n";
  return out;
}

namespace {

std::string problem_name(const ProblemState& state) {
  return to_string(state.inst().kind);
}

}  // namespace

std::string render_filter_prompt(const ProblemState& state,
                                 const std::vector<HeuristicGenome>& pool,
                                 std::size_t budget) {
  return render_template(prompt_template(AdvisorRole::Filter),
                         {{"problem", problem_name(state)},
                          {"state", render_features(extract_features(state), budget)},
                          {"catalog", heuristic_catalog_text(pool)}});
}

std::string render_select_prompt(const ProblemState& state,
                                 const std::vector<HeuristicGenome>& pool,
                                 std::size_t budget) {
  return render_template(prompt_template(AdvisorRole::Select),
                         {{"problem", problem_name(state)},
                          {"state", render_features(extract_features(state), budget)},
                          {"catalog", heuristic_catalog_text(pool)}});
}

std::string render_evolve_prompt(const HeuristicGenome& genome,
                                 const ProblemState& z,
                                 const OperationRecord& original,
                                 const OperationRecord& replacement,
                                 double delta, std::size_t budget) {
  return render_template(prompt_template(AdvisorRole::Evolve),
                         {{"problem", problem_name(z)},
                          {"heuristic_id", genome.id},
                          {"family", genome.info().name},
                          {"description", genome.info().description},
                          {"edit_surface", edit_surface_text(genome)},
                          {"original", to_string(original)},
                          {"replacement", to_string(replacement)},
                          {"delta", format_sig4(delta)},
                          {"state", render_features(extract_features(z), budget)}});
}

std::string render_refine_prompt(const HeuristicGenome& genome,
                                 const StrategyEdit& strategy, double p,
                                 int iteration) {
  return render_template(prompt_template(AdvisorRole::Refine),
                         {{"problem", to_string(genome.info().problem)},
                          {"heuristic_id", genome.id},
                          {"family", genome.info().name},
                          {"edit_surface", edit_surface_text(genome)},
                          {"strategy", format_edit_reply(strategy)},
                          {"performance", format_sig4(p)},
                          {"iteration", std::to_string(iteration)}});
}

}  // namespace hh
