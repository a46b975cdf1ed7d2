#pragma once

// Per-problem building blocks behind the generic environment functions.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hh/core.hpp"

namespace hh::detail {

inline constexpr double kCapacityEps = 1e-9;

FeatureMap tsp_static_features(const TspData& data);
FeatureMap mkp_static_features(const MkpData& data);
FeatureMap maxcut_static_features(const MaxCutData& data);

bool tsp_applicable(const TspData& data, const TspSolution& sol,
                    const OperationRecord& op);
bool mkp_applicable(const MkpData& data, const MkpSolution& sol,
                    const OperationRecord& op);
bool maxcut_applicable(const MaxCutData& data, const MaxCutSolution& sol,
                       const OperationRecord& op);

// Mutators assume the operation was checked applicable.
void tsp_apply(const TspData& data, TspSolution& sol,
               const OperationRecord& op);
void mkp_apply(const MkpData& data, MkpSolution& sol,
               const OperationRecord& op);
void maxcut_apply(const MaxCutData& data, MaxCutSolution& sol,
                  const OperationRecord& op);

double tsp_tour_length(const TspData& data, const std::vector<int>& tour);
double mkp_profit(const MkpData& data, const std::vector<char>& included);
double maxcut_cut(const MaxCutData& data, const std::vector<std::int8_t>& side);

/// Cut-value change from moving `node` to `to_side` (-1 for unassigned).
double maxcut_move_delta(const MaxCutData& data,
                         const std::vector<std::int8_t>& side, int node,
                         int to_side);

/// Parameter grid size for operation kind at a state, and decoding of a grid
/// index into a concrete candidate (not necessarily applicable).
std::size_t op_grid_size(const ProblemState& state, OpKind kind);
OperationRecord op_from_grid(const ProblemState& state, OpKind kind,
                             std::size_t index);

bool is_applicable(const ProblemState& state, const OperationRecord& op);

FeatureMap tsp_dynamic_features(const TspData& data, const TspSolution& sol);
FeatureMap mkp_dynamic_features(const MkpData& data, const MkpSolution& sol);
FeatureMap maxcut_dynamic_features(const MaxCutData& data,
                                   const MaxCutSolution& sol);

void tsp_validate(const TspData& data, const TspSolution& sol,
                  std::vector<std::string>& violations);
void mkp_validate(const MkpData& data, const MkpSolution& sol,
                  std::vector<std::string>& violations);
void maxcut_validate(const MaxCutData& data, const MaxCutSolution& sol,
                     std::vector<std::string>& violations);

/// Mean, population variance, min and max of a sample; all 0 when empty.
struct Moments {
  double mean = 0;
  double variance = 0;
  double min = 0;
  double max = 0;
  std::size_t count = 0;
};

class MomentAccumulator {
 public:
  void add(double x);
  Moments result() const;

 private:
  std::size_t count_ = 0;
  double sum_ = 0;
  double sum_sq_dev_ = 0;  // Welford
  double mean_ = 0;
  double min_ = 0;
  double max_ = 0;
};

}  // namespace hh::detail
