#pragma once

// Problem instances, solution states, operations and trajectories shared by
// every other part of the engine.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hh/error.hpp"

namespace hh {

enum class ProblemKind { Tsp, Mkp, MaxCut };
enum class ObjectiveSense { Minimize, Maximize };

const char* to_string(ProblemKind kind);
std::optional<ProblemKind> problem_kind_from_string(std::string_view text);
const char* to_string(ObjectiveSense sense);
std::optional<ObjectiveSense> sense_from_string(std::string_view text);

constexpr ObjectiveSense sense_of(ProblemKind kind) {
  return kind == ProblemKind::Tsp ? ObjectiveSense::Minimize
                                  : ObjectiveSense::Maximize;
}

/// True when `a` is strictly better than `b` under `sense`.
constexpr bool is_better(double a, double b, ObjectiveSense sense) {
  return sense == ObjectiveSense::Minimize ? a < b : a > b;
}

/// Positive when `candidate` improves on `reference`.
constexpr double improvement(double reference, double candidate,
                             ObjectiveSense sense) {
  return sense == ObjectiveSense::Minimize ? reference - candidate
                                           : candidate - reference;
}

// ---------------------------------------------------------------------------
// Operations

enum class OpKind : std::uint8_t {
  // TSP (args are tour positions unless noted)
  Append,          // (node)
  Insert,          // (node, position)
  Swap,            // (position i, position j)
  ReverseSegment,  // (first, last) inclusive
  Relocate,        // (start, length, destination)
  // MKP (args are item ids)
  Add,       // (item)
  Remove,    // (item)
  Toggle,    // (item)
  SwapItem,  // (included item, excluded item)
  FlipBlock, // (start, length)
  // MaxCut
  AssignNode,  // (node, side); also moves an assigned node to the other side
  SwapNode,    // (u on side 0, v on side 1)
  RemoveNode,  // (node)
};

const char* to_string(OpKind kind);
std::optional<OpKind> op_kind_from_string(std::string_view name);
ProblemKind problem_of(OpKind kind);
int arity(OpKind kind);

struct OperationRecord {
  OpKind kind = OpKind::Append;
  std::array<int, 3> args{};

  friend bool operator==(const OperationRecord&,
                         const OperationRecord&) = default;
};

std::string to_string(const OperationRecord& op);
/// Parses the `Name(a, b)` form produced by to_string.
OperationRecord parse_operation(std::string_view text);

// ---------------------------------------------------------------------------
// Instances

enum class EdgeWeightType { Euc2d, Ceil2d, Explicit, Exact };

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct TspData {
  int n = 0;
  EdgeWeightType weight_type = EdgeWeightType::Explicit;
  std::vector<Point> coords;  // empty for explicit matrices
  std::vector<double> dist;   // n*n row-major

  double d(int i, int j) const {
    return dist[static_cast<std::size_t>(i) * n + j];
  }
};

struct MkpData {
  int n = 0;  // items
  int m = 0;  // resources
  std::vector<double> profits;
  std::vector<double> weights;  // m*n row-major: weights[r*n + i]
  std::vector<double> capacities;

  double w(int r, int i) const {
    return weights[static_cast<std::size_t>(r) * n + i];
  }
};

struct CutEdge {
  int u = 0;
  int v = 0;
  double w = 0;
  friend bool operator==(const CutEdge&, const CutEdge&) = default;
};

struct MaxCutData {
  int n = 0;
  std::vector<CutEdge> edges;  // u < v, duplicates merged
  std::vector<std::vector<std::pair<int, double>>> adj;
};

struct BestKnown {
  double value = 0;
  ObjectiveSense sense = ObjectiveSense::Minimize;
};

using FeatureMap = std::vector<std::pair<std::string, double>>;

std::optional<double> feature_value(const FeatureMap& features,
                                    std::string_view name);

struct ProblemInstance {
  std::string name;
  ProblemKind kind = ProblemKind::Tsp;
  std::variant<TspData, MkpData, MaxCutData> payload;
  std::optional<BestKnown> best_known;
  FeatureMap static_features;

  int size() const;
  ObjectiveSense sense() const { return sense_of(kind); }
  const TspData& tsp() const { return std::get<TspData>(payload); }
  const MkpData& mkp() const { return std::get<MkpData>(payload); }
  const MaxCutData& maxcut() const { return std::get<MaxCutData>(payload); }
};

using InstancePtr = std::shared_ptr<const ProblemInstance>;

// Factories validate payload consistency and precompute static features.
InstancePtr make_tsp_from_coords(std::string name, std::vector<Point> coords,
                                 EdgeWeightType type);
InstancePtr make_tsp_from_matrix(std::string name, int n,
                                 std::vector<double> dist);
InstancePtr make_mkp(std::string name, std::vector<double> profits,
                     std::vector<std::vector<double>> weight_rows,
                     std::vector<double> capacities);
InstancePtr make_maxcut(std::string name, int n, std::vector<CutEdge> edges);
InstancePtr with_best_known(const InstancePtr& inst, BestKnown best);

/// TSPLIB rounded distance for the coordinate-based weight types.
double coord_distance(const Point& a, const Point& b, EdgeWeightType type);

// ---------------------------------------------------------------------------
// Solutions and states

struct TspSolution {
  std::vector<int> tour;
  std::vector<char> visited;
  friend bool operator==(const TspSolution&, const TspSolution&) = default;
};

struct MkpSolution {
  std::vector<char> included;
  std::vector<double> residual;
  friend bool operator==(const MkpSolution&, const MkpSolution&) = default;
};

struct MaxCutSolution {
  static constexpr std::int8_t kUnassigned = -1;
  std::vector<std::int8_t> side;
  double cut_value = 0;
  friend bool operator==(const MaxCutSolution&,
                         const MaxCutSolution&) = default;
};

using Solution = std::variant<TspSolution, MkpSolution, MaxCutSolution>;

struct ProblemState {
  InstancePtr instance;
  Solution solution;
  int step_index = 0;

  const ProblemInstance& inst() const { return *instance; }
  const TspSolution& tsp() const { return std::get<TspSolution>(solution); }
  const MkpSolution& mkp() const { return std::get<MkpSolution>(solution); }
  const MaxCutSolution& cut() const {
    return std::get<MaxCutSolution>(solution);
  }

  friend bool operator==(const ProblemState& a, const ProblemState& b) {
    return a.instance == b.instance && a.step_index == b.step_index &&
           a.solution == b.solution;
  }
};

/// Deterministic transition. Throws Errc::InvalidOperation and leaves the
/// input untouched when the operation is out of range or infeasible.
ProblemState apply_operation(const ProblemState& state,
                             const OperationRecord& op);

/// In-place variant used on hot paths; same validation and guarantees.
void apply_operation_inplace(ProblemState& state, const OperationRecord& op);

/// Whether the operation extends a partial solution rather than editing it.
bool is_constructive(const ProblemState& state, const OperationRecord& op);

/// Whether the state holds a complete solution.
bool is_complete(const ProblemState& state);

/// Objective of the current (possibly partial) solution.
double objective_value(const ProblemState& state);

/// Step cap N = 10 * problem size.
int step_cap(const ProblemInstance& instance);

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectoryStep {
  OperationRecord op;
  int heuristic = -1;  // index into Trajectory::heuristic_ids
  friend bool operator==(const TrajectoryStep&,
                         const TrajectoryStep&) = default;
};

/// Ordered operations from a start state. States are not copied; replay
/// reconstructs any intermediate snapshot from the start state.
struct Trajectory {
  ProblemState start;
  std::vector<TrajectoryStep> steps;
  std::vector<std::string> heuristic_ids;
  double terminal_cost = 0;
  std::uint64_t seed = 0;

  int heuristic_slot(const std::string& id);
  const std::string& heuristic_of(std::size_t step) const;
};

/// State before step `upto` (the terminal state when upto == steps.size()).
ProblemState replay(const Trajectory& traj, std::size_t upto);
ProblemState replay(const Trajectory& traj);

/// C(S): the objective of the terminal state. Throws IncompleteSolution.
double trajectory_cost(const Trajectory& traj);

}  // namespace hh
