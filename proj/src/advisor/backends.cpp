#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "hh/advisor.hpp"
#include "hh/envs.hpp"

namespace hh {

namespace {

std::string scripted_filter(const ScriptedContext& ctx) {
  std::string out;
  for (const auto& g : ctx.pool) out += (out.empty() ? "" : ", ") + g.id;
  return out;
}

// Objective after one step of each heuristic; NoOperation scores worst.
std::size_t one_step_lookahead(const ScriptedContext& ctx) {
  const ProblemState& state = *ctx.state;
  const double worst = ctx.sense == ObjectiveSense::Minimize
                           ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  double best_score = worst;
  for (std::size_t i = 0; i < ctx.pool.size(); ++i) {
    double score = worst;
    try {
      AlgorithmData data;
      Rng rng(0);
      if (auto op = heuristic_step(ctx.pool[i], state, data, rng).operation) {
        score = objective_value(apply_operation(state, *op));
      }
    } catch (const Error&) {
      score = worst;
    }
    if (i == 0 || is_better(score, best_score, ctx.sense)) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

std::string scripted_select(const AdvisorRequest& req) {
  const ScriptedContext& ctx = *req.context;
  if (ctx.pool.empty() || !ctx.state) {
    throw Error(Errc::AdvisorUnavailable, "scripted select needs a pool and a state");
  }
  std::size_t pick = 0;
  if (ctx.sample_index == 0) {
    pick = one_step_lookahead(ctx);
  } else {
    const auto h = fnv1a64(req.prompt + "#" + std::to_string(ctx.sample_index));
    pick = static_cast<std::size_t>(h % ctx.pool.size());
  }
  return format_select_reply(ctx.pool[pick].id, extract_features(*ctx.state));
}

std::vector<double> param_candidates(const ParamSpec& p, double v) {
  std::vector<double> raw{p.lo, p.hi, v * 0.5, v * 2, v + 0.1 * (p.hi - p.lo),
                          v - 0.1 * (p.hi - p.lo)};
  std::vector<double> out;
  for (double c : raw) {
    if (p.integral) c = std::round(c);
    c = std::clamp(c, p.lo, p.hi);
    if (c != v && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

// One coordinate-descent step over the edit surface, scored by ctx.evaluate.
std::string scripted_edit(const ScriptedContext& ctx) {
  if (!ctx.genome || !ctx.evaluate) {
    throw Error(Errc::AdvisorUnavailable, "scripted evolve needs a genome and an evaluator");
  }
  const HeuristicGenome& g = *ctx.genome;
  double best_p = ctx.evaluate(g);
  std::optional<ParamEdit> best;
  auto consider = [&](ParamEdit edit) {
    const auto candidate = mutate_genome(g, {"", g.family, {edit}, ""});
    const double p = ctx.evaluate(candidate);
    if (is_better(p, best_p, ctx.sense)) {
      best_p = p;
      best = edit;
    }
  };
  for (const auto& f : g.info().flags) consider({f.name, g.flag(f.name) ? 0.0 : 1.0});
  for (const auto& p : g.info().params) {
    for (double c : param_candidates(p, g.param(p.name))) consider({p.name, c});
  }
  StrategyEdit edit;
  edit.target = g.family;
  edit.rationale = "scripted";
  if (best) edit.edits.push_back(*best);
  return format_edit_reply(edit);
}

}  // namespace

std::string ScriptedAdvisor::complete(const AdvisorRequest& request) {
  if (!request.context) {
    throw Error(Errc::AdvisorUnavailable, "scripted advisor needs structured context");
  }
  switch (request.role) {
    case AdvisorRole::Filter: return scripted_filter(*request.context);
    case AdvisorRole::Select: return scripted_select(request);
    case AdvisorRole::Evolve:
    case AdvisorRole::Refine: return scripted_edit(*request.context);
  }
  return {};
}

std::vector<TranscriptEntry> load_transcript(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open transcript " + path);
  std::vector<TranscriptEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("hash") || !j.contains("reply")) {
      throw Error(Errc::ConfigError, "malformed transcript line in " + path);
    }
    out.push_back({j["hash"].get<std::string>(), j.value("role", ""),
                   j["reply"].get<std::string>()});
  }
  return out;
}

ReplayAdvisor::ReplayAdvisor(const std::vector<TranscriptEntry>& entries) {
  for (const auto& e : entries) replies_.emplace(e.hash, e.reply);
}

std::string ReplayAdvisor::complete(const AdvisorRequest& request) {
  const auto hash = request_hash(request);
  const auto it = replies_.find(hash);
  if (it == replies_.end()) {
    throw Error(Errc::TranscriptMiss, "no recorded reply for " +
                                          std::string(to_string(request.role)) +
                                          " request " + hash);
  }
  return it->second;
}

RecordingAdvisor::RecordingAdvisor(AdvisorPtr inner, std::string path)
    : inner_(std::move(inner)), path_(std::move(path)) {}

std::string RecordingAdvisor::complete(const AdvisorRequest& request) {
  std::string reply = inner_->complete(request);
  nlohmann::json j;
  j["hash"] = request_hash(request);
  j["role"] = to_string(request.role);
  j["reply"] = reply;
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  out << j.dump() << "\n";
  return reply;
}

}  // namespace hh
