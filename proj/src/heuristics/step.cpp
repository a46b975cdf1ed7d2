#include "internal.hpp"

namespace hh {

HeuristicDecision heuristic_step(const HeuristicGenome& genome,
                                 const ProblemState& state, AlgorithmData& data,
                                 Rng& rng) {
  const ProblemKind kind = state.inst().kind;
  if (genome.info().problem != kind) {
    throw Error(Errc::HeuristicFault, genome.id + " cannot run on " +
                                          std::string(to_string(kind)));
  }
  switch (kind) {
    case ProblemKind::Tsp: return {heuristics::tsp_step(genome, state, data, rng)};
    case ProblemKind::Mkp: return {heuristics::mkp_step(genome, state, data, rng)};
    case ProblemKind::MaxCut:
      return {heuristics::maxcut_step(genome, state, data, rng)};
  }
  return {};
}

}  // namespace hh
