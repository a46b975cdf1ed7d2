#include <doctest.h>

#include <cmath>

#include "hh/core.hpp"
#include "hh/engine.hpp"
#include "hh/envs.hpp"
#include "support.hpp"

using namespace hh;
using hh::test::unit_square;

namespace {

OperationRecord op(OpKind k, int a = 0, int b = 0, int c = 0) { return {k, {a, b, c}}; }

ProblemState tsp_with_tour(const InstancePtr& inst, std::vector<int> tour) {
  ProblemState s = initial_state(inst);
  for (int v : tour) s = apply_operation(s, op(OpKind::Append, v));
  return s;
}

}  // namespace

TEST_CASE("append extends the tour") {
  auto s = tsp_with_tour(unit_square(), {0});
  auto next = apply_operation(s, op(OpKind::Append, 2));
  CHECK(next.tsp().tour == std::vector<int>{0, 2});
  CHECK(next.step_index == s.step_index + 1);
}

TEST_CASE("adding an included item is rejected and leaves the state intact") {
  auto inst = make_mkp("m", {10, 7}, {{3, 2}}, {4});
  auto s = apply_operation(initial_state(inst), op(OpKind::Add, 0));
  const auto before = s;
  CHECK_THROWS_AS(apply_operation_inplace(s, op(OpKind::Add, 0)), Error);
  try {
    apply_operation(s, op(OpKind::Add, 0));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidOperation);
  }
  CHECK(s == before);
}

TEST_CASE("reversing the crossed square tour removes the crossing") {
  auto s = tsp_with_tour(unit_square(), {0, 2, 1, 3});
  CHECK(objective_value(s) == doctest::Approx(2 + 2 * std::sqrt(2.0)));
  auto next = apply_operation(s, op(OpKind::ReverseSegment, 1, 2));
  CHECK(next.tsp().tour == std::vector<int>{0, 1, 2, 3});
  CHECK(objective_value(next) == doctest::Approx(4.0));
}

TEST_CASE("run_heuristic_steps") {
  const auto nn = make_genome(Family::NearestNeighbor);
  SUBCASE("complete tour with a constructive heuristic is a no-op") {
    auto s = tsp_with_tour(unit_square(), {0, 1, 2, 3});
    auto burst = run_heuristic_steps(s, nn, 5, 1);
    CHECK(burst.applied == 0);
    CHECK(burst.state == s);
  }
  SUBCASE("empty square with nearest neighbor completes in 4 steps") {
    auto burst = run_heuristic_steps(initial_state(unit_square()), nn, 4, 1);
    CHECK(burst.applied == 4);
    CHECK(is_complete(burst.state));
    CHECK(burst.state.tsp().tour == std::vector<int>{0, 1, 2, 3});
  }
  SUBCASE("stops early once nothing is left to construct") {
    auto s = tsp_with_tour(unit_square(), {0, 1});
    auto burst = run_heuristic_steps(s, nn, 5, 1);
    CHECK(burst.applied == 2);
    CHECK(is_complete(burst.state));
  }
  SUBCASE("heuristic of another problem faults") {
    auto s = initial_state(unit_square());
    CHECK_THROWS_AS(run_heuristic_steps(s, make_genome(Family::GreedyByProfit), 1, 1), Error);
  }
}

TEST_CASE("rollout_random") {
  SUBCASE("two nodes give the unique tour") {
    auto inst = make_tsp_from_coords("two", {{0, 0}, {3, 4}}, EdgeWeightType::Euc2d);
    auto traj = rollout_random(initial_state(inst), default_pool(ProblemKind::Tsp), 9);
    CHECK(traj.terminal_cost == 10.0);
  }
  SUBCASE("a single deterministic heuristic is seed independent") {
    auto inst = hh::test::random_tsp(8, 3);
    std::vector<HeuristicGenome> pool{make_genome(Family::CheapestInsertion)};
    auto a = rollout_random(initial_state(inst), pool, 1);
    auto b = rollout_random(initial_state(inst), pool, 2);
    CHECK(a.steps == b.steps);
    CHECK(a.terminal_cost == b.terminal_cost);
  }
  SUBCASE("fixed seed is reproducible") {
    auto inst = unit_square();
    auto pool = default_pool(ProblemKind::Tsp);
    auto a = rollout_random(initial_state(inst), pool, 77);
    auto b = rollout_random(initial_state(inst), pool, 77);
    CHECK(a.steps == b.steps);
    CHECK(a.heuristic_ids == b.heuristic_ids);
  }
  SUBCASE("only improvement heuristics cannot complete a tour") {
    std::vector<HeuristicGenome> pool{make_genome(Family::TwoOpt)};
    CHECK_THROWS_AS(rollout_random(initial_state(unit_square()), pool, 1), Error);
  }
}

TEST_CASE("trajectory_cost") {
  Trajectory t;
  t.start = initial_state(unit_square());
  for (int v : {0, 1, 2, 3}) t.steps.push_back({op(OpKind::Append, v), -1});
  CHECK(trajectory_cost(t) == 4.0);

  Trajectory m;
  m.start = initial_state(make_mkp("m", {10, 7}, {{3, 2}}, {4}));
  m.steps.push_back({op(OpKind::Add, 0), -1});
  CHECK(trajectory_cost(m) == 10.0);

  Trajectory empty;
  empty.start = initial_state(unit_square());
  try {
    trajectory_cost(empty);
    FAIL("expected IncompleteSolution");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IncompleteSolution);
  }
}

TEST_CASE("replay reproduces rollout costs bit-exactly") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (ProblemKind kind : {ProblemKind::Tsp, ProblemKind::Mkp, ProblemKind::MaxCut}) {
      InstancePtr inst = kind == ProblemKind::Tsp   ? hh::test::random_tsp(12, seed)
                         : kind == ProblemKind::Mkp ? hh::test::random_mkp(15, 3, seed)
                                                    : hh::test::random_maxcut(12, 0.4, seed, true);
      auto traj = rollout_random(initial_state(inst), default_pool(kind), seed * 31 + 7);
      CHECK(trajectory_cost(traj) == traj.terminal_cost);
      auto report = validate_solution(*inst, replay(traj).solution);
      CHECK(report.valid);
    }
  }
}

TEST_CASE("apply_operation is a pure function") {
  Rng rng(5);
  auto inst = hh::test::random_maxcut(10, 0.5, 4, true);
  auto s = initial_state(inst);
  for (int k = 0; k < 200; ++k) {
    const auto ops = applicable_operations(s, rng.bernoulli(0.5) ? OpKind::AssignNode : OpKind::SwapNode);
    if (ops.empty()) continue;
    const auto o = ops[rng.uniform_index(ops.size())];
    const auto a = apply_operation(s, o);
    const auto b = apply_operation(s, o);
    CHECK(a == b);
    s = a;
  }
}

TEST_CASE("operation text round-trips") {
  for (const auto& o : {op(OpKind::Insert, 3, 1), op(OpKind::Relocate, 1, 2, 4), op(OpKind::Add, 7),
                        op(OpKind::SwapNode, 2, 5)}) {
    CHECK(parse_operation(to_string(o)) == o);
  }
}

TEST_CASE("step cap is ten times the size") {
  CHECK(step_cap(*unit_square()) == 40);
}
