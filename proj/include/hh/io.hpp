#pragma once

// Instance formats (TSPLIB, OR-Library mknap, MaxCut edge lists), generated
// instances, the best-known registry, gaps and run records.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hh/core.hpp"

namespace hh {

/// EUC_2D, CEIL_2D and EXPLICIT (FULL_MATRIX, UPPER_ROW, UPPER_DIAG_ROW,
/// LOWER_ROW, LOWER_DIAG_ROW). Throws UnsupportedEdgeWeightType or
/// MalformedSection.
InstancePtr parse_tsplib(std::string_view text);

/// Coordinate instances keep their coordinates; everything else is written
/// as an explicit full matrix.
std::string serialize_tsplib(const ProblemInstance& instance);

/// Multi-problem OR-Library layout. Non-zero embedded optima become best-known
/// values. Throws TruncatedFile or CountMismatch.
std::vector<InstancePtr> parse_orlib_mknap(std::string_view text,
                                           const std::string& name_prefix = "mknap");
std::string serialize_orlib_mknap(const std::vector<InstancePtr>& instances);

/// "n m" then m lines "u v w", 1-indexed; duplicates are summed. Throws
/// IndexOutOfRange or EdgeCountMismatch.
InstancePtr parse_maxcut_edges(std::string_view text, const std::string& name = "maxcut");
std::string serialize_maxcut_edges(const ProblemInstance& instance);

/// Reads a file, choosing the parser from the problem kind. MKP files may
/// hold several problems.
std::vector<InstancePtr> load_instances(const std::string& path, ProblemKind kind);

/// Deterministic synthetic instance.
/// TSP: uniform points in [0,1000]^2, EUC_2D. MKP: 5 resources, profits and
/// weights uniform in [1,100], capacities half the row sums. MaxCut:
/// G(n, 0.5) with weights uniform in {-1,...,10}.
InstancePtr generate_instance(ProblemKind kind, int size, std::uint64_t seed);

/// Structural equality (name, kind, payload, best-known).
bool same_instance(const ProblemInstance& a, const ProblemInstance& b);

struct BestKnownEntry {
  double value = 0;
  ObjectiveSense sense = ObjectiveSense::Minimize;
  std::string source;
};

/// Instance name -> reference value, case-insensitive.
class BestKnownRegistry {
 public:
  void set(const std::string& name, BestKnownEntry entry);
  std::optional<BestKnownEntry> lookup(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }

  /// `name value sense [source]` lines; '#' starts a comment.
  static BestKnownRegistry parse(std::string_view text);
  static BestKnownRegistry load(const std::string& path);
  std::string serialize() const;

  /// Records every instance's embedded best-known value.
  void absorb(const std::vector<InstancePtr>& instances, const std::string& source);

  /// The instance with its registry value attached, or unchanged when absent.
  InstancePtr apply(const InstancePtr& instance) const;

 private:
  std::map<std::string, std::pair<std::string, BestKnownEntry>> entries_;
};

/// Percent gap, positive when v is worse than v_u. Throws ZeroReference.
double compute_gap(double v, double v_u, ObjectiveSense sense);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Operations (as text) and heuristic ids of a trajectory.
std::string trajectory_to_json(const Trajectory& traj);
/// Rebuilds a trajectory on `start`; replay then recomputes every state.
Trajectory trajectory_from_json(std::string_view json, const ProblemState& start);

/// Native-format text of any instance (TSPLIB, mknap, edge list).
std::string serialize_instance(const ProblemInstance& instance);
/// Inverse of serialize_instance; the result is renamed to `name`.
InstancePtr parse_instance(std::string_view text, ProblemKind kind, const std::string& name);

/// Everything needed to replay a run: the instance itself, the config
/// snapshot, the pool, the seed and the operation sequence.
struct RunRecord {
  std::string config_json = "{}";
  InstancePtr instance;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  std::vector<std::string> pool;  // genome texts
  std::string decision_log;
  double wall_seconds = 0;
  bool timed_out = false;
  std::optional<double> gap;
};

std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(std::string_view json);

}  // namespace hh
