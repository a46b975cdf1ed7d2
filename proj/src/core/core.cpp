#include "hh/core.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <cmath>
#include <sstream>

#include "../envs/detail.hpp"

namespace hh {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::InvalidOperation: return "InvalidOperation";
    case Errc::HeuristicFault: return "HeuristicFault";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::IncompleteSolution: return "IncompleteSolution";
    case Errc::InfeasibleSolution: return "InfeasibleSolution";
    case Errc::NoAlternative: return "NoAlternative";
    case Errc::UnknownTarget: return "UnknownTarget";
    case Errc::NoCandidates: return "NoCandidates";
    case Errc::AdvisorUnavailable: return "AdvisorUnavailable";
    case Errc::AdvisorParseError: return "AdvisorParseError";
    case Errc::Timeout: return "Timeout";
    case Errc::HttpError: return "HttpError";
    case Errc::BudgetExhausted: return "BudgetExhausted";
    case Errc::TranscriptMiss: return "TranscriptMiss";
    case Errc::GroupTooSmall: return "GroupTooSmall";
    case Errc::UnsupportedEdgeWeightType: return "UnsupportedEdgeWeightType";
    case Errc::MalformedSection: return "MalformedSection";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::EdgeCountMismatch: return "EdgeCountMismatch";
    case Errc::ZeroReference: return "ZeroReference";
    case Errc::InvalidInstance: return "InvalidInstance";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Tsp: return "tsp";
    case ProblemKind::Mkp: return "mkp";
    case ProblemKind::MaxCut: return "maxcut";
  }
  return "?";
}

std::optional<ProblemKind> problem_kind_from_string(std::string_view text) {
  const std::string t = lower(text);
  if (t == "tsp") return ProblemKind::Tsp;
  if (t == "mkp") return ProblemKind::Mkp;
  if (t == "maxcut" || t == "max_cut") return ProblemKind::MaxCut;
  return std::nullopt;
}

const char* to_string(ObjectiveSense sense) {
  return sense == ObjectiveSense::Minimize ? "min" : "max";
}

std::optional<ObjectiveSense> sense_from_string(std::string_view text) {
  const std::string t = lower(text);
  if (t == "min" || t == "minimize") return ObjectiveSense::Minimize;
  if (t == "max" || t == "maximize") return ObjectiveSense::Maximize;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Operations

namespace {

struct OpInfo {
  OpKind kind;
  const char* name;
  ProblemKind problem;
  int arity;
};

constexpr OpInfo kOps[] = {
    {OpKind::Append, "Append", ProblemKind::Tsp, 1},
    {OpKind::Insert, "Insert", ProblemKind::Tsp, 2},
    {OpKind::Swap, "Swap", ProblemKind::Tsp, 2},
    {OpKind::ReverseSegment, "ReverseSegment", ProblemKind::Tsp, 2},
    {OpKind::Relocate, "Relocate", ProblemKind::Tsp, 3},
    {OpKind::Add, "Add", ProblemKind::Mkp, 1},
    {OpKind::Remove, "Remove", ProblemKind::Mkp, 1},
    {OpKind::Toggle, "Toggle", ProblemKind::Mkp, 1},
    {OpKind::SwapItem, "SwapItem", ProblemKind::Mkp, 2},
    {OpKind::FlipBlock, "FlipBlock", ProblemKind::Mkp, 2},
    {OpKind::AssignNode, "AssignNode", ProblemKind::MaxCut, 2},
    {OpKind::SwapNode, "SwapNode", ProblemKind::MaxCut, 2},
    {OpKind::RemoveNode, "RemoveNode", ProblemKind::MaxCut, 1},
};

const OpInfo& info(OpKind kind) {
  return kOps[static_cast<std::size_t>(kind)];
}

}  // namespace

const char* to_string(OpKind kind) { return info(kind).name; }

std::optional<OpKind> op_kind_from_string(std::string_view name) {
  for (const auto& op : kOps) {
    if (name == op.name) return op.kind;
  }
  return std::nullopt;
}

ProblemKind problem_of(OpKind kind) { return info(kind).problem; }
int arity(OpKind kind) { return info(kind).arity; }

std::string to_string(const OperationRecord& op) {
  std::string out = to_string(op.kind);
  out += '(';
  for (int i = 0; i < arity(op.kind); ++i) {
    if (i) out += ", ";
    out += std::to_string(op.args[i]);
  }
  out += ')';
  return out;
}

OperationRecord parse_operation(std::string_view text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string_view::npos || close == std::string_view::npos ||
      close < open) {
    throw Error(Errc::InvalidOperation,
                "cannot parse operation '" + std::string(text) + "'");
  }
  std::string_view name = text.substr(0, open);
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back())))
    name.remove_suffix(1);
  while (!name.empty() &&
         std::isspace(static_cast<unsigned char>(name.front())))
    name.remove_prefix(1);
  const auto kind = op_kind_from_string(name);
  if (!kind) {
    throw Error(Errc::InvalidOperation,
                "unknown operation '" + std::string(name) + "'");
  }
  OperationRecord op{*kind, {}};
  std::string body(text.substr(open + 1, close - open - 1));
  std::replace(body.begin(), body.end(), ',', ' ');
  std::istringstream in(body);
  int count = 0;
  int value = 0;
  while (in >> value) {
    if (count >= 3) break;
    op.args[count++] = value;
  }
  if (count != arity(*kind)) {
    throw Error(Errc::InvalidOperation,
                "wrong argument count in '" + std::string(text) + "'");
  }
  return op;
}

// ---------------------------------------------------------------------------
// Instances

std::optional<double> feature_value(const FeatureMap& features,
                                    std::string_view name) {
  for (const auto& [key, value] : features) {
    if (key == name) return value;
  }
  return std::nullopt;
}

int ProblemInstance::size() const {
  switch (kind) {
    case ProblemKind::Tsp: return tsp().n;
    case ProblemKind::Mkp: return mkp().n;
    case ProblemKind::MaxCut: return maxcut().n;
  }
  return 0;
}

double coord_distance(const Point& a, const Point& b, EdgeWeightType type) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double raw = std::sqrt(dx * dx + dy * dy);
  switch (type) {
    case EdgeWeightType::Euc2d: return std::floor(raw + 0.5);
    case EdgeWeightType::Ceil2d: return std::ceil(raw);
    case EdgeWeightType::Exact:
    case EdgeWeightType::Explicit: return raw;
  }
  return raw;
}

InstancePtr make_tsp_from_coords(std::string name, std::vector<Point> coords,
                                 EdgeWeightType type) {
  if (coords.size() < 2) {
    throw Error(Errc::InvalidInstance, "TSP needs at least two nodes");
  }
  for (const auto& p : coords) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(Errc::InvalidInstance, "non-finite coordinate");
    }
  }
  TspData data;
  data.n = static_cast<int>(coords.size());
  data.weight_type = type;
  data.dist.assign(static_cast<std::size_t>(data.n) * data.n, 0.0);
  for (int i = 0; i < data.n; ++i) {
    for (int j = i + 1; j < data.n; ++j) {
      const double d = coord_distance(coords[i], coords[j], type);
      data.dist[static_cast<std::size_t>(i) * data.n + j] = d;
      data.dist[static_cast<std::size_t>(j) * data.n + i] = d;
    }
  }
  data.coords = std::move(coords);
  auto inst = std::make_shared<ProblemInstance>();
  inst->name = std::move(name);
  inst->kind = ProblemKind::Tsp;
  inst->static_features = detail::tsp_static_features(data);
  inst->payload = std::move(data);
  return inst;
}

InstancePtr make_tsp_from_matrix(std::string name, int n,
                                 std::vector<double> dist) {
  if (n < 2) throw Error(Errc::InvalidInstance, "TSP needs at least two nodes");
  if (dist.size() != static_cast<std::size_t>(n) * n) {
    throw Error(Errc::InvalidInstance, "distance matrix is not square");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = dist[static_cast<std::size_t>(i) * n + j];
      const double b = dist[static_cast<std::size_t>(j) * n + i];
      if (!std::isfinite(a)) {
        throw Error(Errc::InvalidInstance, "non-finite distance");
      }
      if (a != b) throw Error(Errc::InvalidInstance, "matrix not symmetric");
    }
    if (dist[static_cast<std::size_t>(i) * n + i] != 0.0) {
      throw Error(Errc::InvalidInstance, "non-zero diagonal");
    }
  }
  TspData data;
  data.n = n;
  data.weight_type = EdgeWeightType::Explicit;
  data.dist = std::move(dist);
  auto inst = std::make_shared<ProblemInstance>();
  inst->name = std::move(name);
  inst->kind = ProblemKind::Tsp;
  inst->static_features = detail::tsp_static_features(data);
  inst->payload = std::move(data);
  return inst;
}

InstancePtr make_mkp(std::string name, std::vector<double> profits,
                     std::vector<std::vector<double>> weight_rows,
                     std::vector<double> capacities) {
  MkpData data;
  data.n = static_cast<int>(profits.size());
  data.m = static_cast<int>(weight_rows.size());
  if (data.n < 1 || data.m < 1) {
    throw Error(Errc::InvalidInstance, "MKP needs items and resources");
  }
  if (capacities.size() != weight_rows.size()) {
    throw Error(Errc::InvalidInstance, "capacity count != resource count");
  }
  data.weights.reserve(static_cast<std::size_t>(data.n) * data.m);
  for (const auto& row : weight_rows) {
    if (static_cast<int>(row.size()) != data.n) {
      throw Error(Errc::InvalidInstance, "weight row length != item count");
    }
    for (double w : row) {
      if (!std::isfinite(w) || w < 0) {
        throw Error(Errc::InvalidInstance, "weights must be finite and >= 0");
      }
      data.weights.push_back(w);
    }
  }
  for (double p : profits) {
    if (!std::isfinite(p) || p < 0) {
      throw Error(Errc::InvalidInstance, "profits must be finite and >= 0");
    }
  }
  for (double c : capacities) {
    if (!std::isfinite(c) || c < 0) {
      throw Error(Errc::InvalidInstance, "capacities must be finite and >= 0");
    }
  }
  data.profits = std::move(profits);
  data.capacities = std::move(capacities);
  auto inst = std::make_shared<ProblemInstance>();
  inst->name = std::move(name);
  inst->kind = ProblemKind::Mkp;
  inst->static_features = detail::mkp_static_features(data);
  inst->payload = std::move(data);
  return inst;
}

InstancePtr make_maxcut(std::string name, int n, std::vector<CutEdge> edges) {
  if (n < 1) throw Error(Errc::InvalidInstance, "MaxCut needs nodes");
  MaxCutData data;
  data.n = n;
  // Merge duplicates (weights summed) into the first occurrence; u < v.
  std::map<std::pair<int, int>, std::size_t> first_seen;
  for (auto e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
      throw Error(Errc::IndexOutOfRange, "edge endpoint out of range");
    }
    if (e.u == e.v) throw Error(Errc::InvalidInstance, "self loop");
    if (!std::isfinite(e.w)) throw Error(Errc::InvalidInstance, "bad weight");
    if (e.u > e.v) std::swap(e.u, e.v);
    auto [it, inserted] = first_seen.try_emplace({e.u, e.v}, data.edges.size());
    if (inserted) {
      data.edges.push_back(e);
    } else {
      data.edges[it->second].w += e.w;
    }
  }
  data.adj.assign(n, {});
  for (const auto& e : data.edges) {
    data.adj[e.u].push_back({e.v, e.w});
    data.adj[e.v].push_back({e.u, e.w});
  }
  auto inst = std::make_shared<ProblemInstance>();
  inst->name = std::move(name);
  inst->kind = ProblemKind::MaxCut;
  inst->static_features = detail::maxcut_static_features(data);
  inst->payload = std::move(data);
  return inst;
}

InstancePtr with_best_known(const InstancePtr& inst, BestKnown best) {
  if (!std::isfinite(best.value)) {
    throw Error(Errc::InvalidInstance, "best-known value must be finite");
  }
  auto copy = std::make_shared<ProblemInstance>(*inst);
  copy->best_known = best;
  return copy;
}

// ---------------------------------------------------------------------------
// Transitions

bool detail::is_applicable(const ProblemState& state,
                           const OperationRecord& op) {
  const auto& inst = state.inst();
  if (problem_of(op.kind) != inst.kind) return false;
  switch (inst.kind) {
    case ProblemKind::Tsp:
      return tsp_applicable(inst.tsp(), state.tsp(), op);
    case ProblemKind::Mkp:
      return mkp_applicable(inst.mkp(), state.mkp(), op);
    case ProblemKind::MaxCut:
      return maxcut_applicable(inst.maxcut(), state.cut(), op);
  }
  return false;
}

void apply_operation_inplace(ProblemState& state, const OperationRecord& op) {
  if (!detail::is_applicable(state, op)) {
    throw Error(Errc::InvalidOperation,
                to_string(op) + " not applicable at step " +
                    std::to_string(state.step_index));
  }
  const auto& inst = state.inst();
  switch (inst.kind) {
    case ProblemKind::Tsp:
      detail::tsp_apply(inst.tsp(), std::get<TspSolution>(state.solution), op);
      break;
    case ProblemKind::Mkp:
      detail::mkp_apply(inst.mkp(), std::get<MkpSolution>(state.solution), op);
      break;
    case ProblemKind::MaxCut:
      detail::maxcut_apply(inst.maxcut(),
                           std::get<MaxCutSolution>(state.solution), op);
      break;
  }
  ++state.step_index;
}

ProblemState apply_operation(const ProblemState& state,
                             const OperationRecord& op) {
  ProblemState next = state;
  apply_operation_inplace(next, op);
  return next;
}

bool is_constructive(const ProblemState& state, const OperationRecord& op) {
  switch (op.kind) {
    case OpKind::Append:
    case OpKind::Insert:
    case OpKind::Add:
      return true;
    case OpKind::AssignNode: {
      const auto& side = state.cut().side;
      return op.args[0] >= 0 && op.args[0] < static_cast<int>(side.size()) &&
             side[op.args[0]] == MaxCutSolution::kUnassigned;
    }
    default:
      return false;
  }
}

bool is_complete(const ProblemState& state) {
  switch (state.inst().kind) {
    case ProblemKind::Tsp:
      return static_cast<int>(state.tsp().tour.size()) == state.inst().tsp().n;
    case ProblemKind::Mkp:
      return true;
    case ProblemKind::MaxCut: {
      const auto& side = state.cut().side;
      return std::none_of(side.begin(), side.end(), [](std::int8_t s) {
        return s == MaxCutSolution::kUnassigned;
      });
    }
  }
  return false;
}

double objective_value(const ProblemState& state) {
  const auto& inst = state.inst();
  switch (inst.kind) {
    case ProblemKind::Tsp:
      return detail::tsp_tour_length(inst.tsp(), state.tsp().tour);
    case ProblemKind::Mkp:
      return detail::mkp_profit(inst.mkp(), state.mkp().included);
    case ProblemKind::MaxCut:
      return state.cut().cut_value;
  }
  return 0;
}

int step_cap(const ProblemInstance& instance) { return 10 * instance.size(); }

// ---------------------------------------------------------------------------
// Trajectories

int Trajectory::heuristic_slot(const std::string& id) {
  for (std::size_t i = 0; i < heuristic_ids.size(); ++i) {
    if (heuristic_ids[i] == id) return static_cast<int>(i);
  }
  heuristic_ids.push_back(id);
  return static_cast<int>(heuristic_ids.size() - 1);
}

const std::string& Trajectory::heuristic_of(std::size_t step) const {
  static const std::string kNone = "";
  const int slot = steps.at(step).heuristic;
  if (slot < 0 || slot >= static_cast<int>(heuristic_ids.size())) return kNone;
  return heuristic_ids[slot];
}

ProblemState replay(const Trajectory& traj, std::size_t upto) {
  ProblemState state = traj.start;
  upto = std::min(upto, traj.steps.size());
  for (std::size_t i = 0; i < upto; ++i) {
    apply_operation_inplace(state, traj.steps[i].op);
  }
  return state;
}

ProblemState replay(const Trajectory& traj) {
  return replay(traj, traj.steps.size());
}

}  // namespace hh
