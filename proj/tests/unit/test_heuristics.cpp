#include <doctest.h>

#include <cmath>
#include <set>

#include "hh/engine.hpp"
#include "hh/heuristics.hpp"
#include "support.hpp"

using namespace hh;
using namespace hh::test;

namespace {

OperationRecord op(OpKind k, int a = 0, int b = 0, int c = 0) { return {k, {a, b, c}}; }

std::optional<OperationRecord> step(const HeuristicGenome& g, const ProblemState& s,
                                    std::uint64_t seed = 1) {
  AlgorithmData data;
  Rng rng(seed);
  return heuristic_step(g, s, data, rng).operation;
}

// Textbook nearest neighbor: start at node 0, extend to the closest unvisited node.
OperationRecord ref_nearest_neighbor(const ProblemState& s) {
  const auto& d = s.inst().tsp();
  const auto& tour = s.tsp().tour;
  if (tour.empty()) return op(OpKind::Append, 0);
  int best = -1;
  for (int v = 0; v < d.n; ++v) {
    if (s.tsp().visited[v]) continue;
    if (best < 0 || d.d(tour.back(), v) < d.d(tour.back(), best)) best = v;
  }
  return op(OpKind::Insert, best, static_cast<int>(tour.size()));
}

// Textbook cheapest insertion, measured by full tour-length recomputation.
OperationRecord ref_cheapest_insertion(const ProblemState& s) {
  const auto& d = s.inst().tsp();
  const auto& tour = s.tsp().tour;
  if (tour.empty()) return op(OpKind::Append, 0);
  const double base = ref_tour_length(d, tour);
  double best = std::numeric_limits<double>::infinity();
  OperationRecord out{};
  const int positions = tour.size() == 1 ? 2 : static_cast<int>(tour.size());
  for (int v = 0; v < d.n; ++v) {
    if (s.tsp().visited[v]) continue;
    for (int p = 0; p < positions; ++p) {
      auto t = tour;
      t.insert(t.begin() + p, v);
      const double c = ref_tour_length(d, t) - base;
      if (c < best) {
        best = c;
        out = op(OpKind::Insert, v, tour.size() == 1 ? 1 : p);
      }
    }
  }
  return out;
}

bool is_applicable_add(const ProblemState& s, int item) {
  try {
    apply_operation(s, {OpKind::Add, {item, 0, 0}});
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::optional<OperationRecord> ref_greedy_density(const ProblemState& s) {
  const auto& d = s.inst().mkp();
  std::optional<OperationRecord> best;
  double best_score = 0;
  for (int i = 0; i < d.n; ++i) {
    if (!is_applicable_add(s, i)) continue;
    double w = 0;
    for (int r = 0; r < d.m; ++r) w += d.w(r, i);
    const double score = d.profits[i] / (w + 1e-6);
    if (!best || score > best_score) {
      best = op(OpKind::Add, i);
      best_score = score;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("default pools") {
  CHECK(default_pool(ProblemKind::Tsp).size() == 10);
  CHECK(default_pool(ProblemKind::Mkp).size() == 11);
  CHECK(default_pool(ProblemKind::MaxCut).size() == 8);
  for (ProblemKind kind : {ProblemKind::Tsp, ProblemKind::Mkp, ProblemKind::MaxCut}) {
    std::set<std::string> ids;
    for (const auto& g : default_pool(kind)) {
      ids.insert(g.id);
      CHECK(g.id.size() == g.info().name.size() + 5);
      CHECK(g.id.rfind(g.info().name + "_", 0) == 0);
    }
    CHECK(ids.size() == default_pool(kind).size());
  }
}

TEST_CASE("catalog examples") {
  SUBCASE("nearest neighbor picks node 1 after node 0 on the square") {
    auto s = apply_operation(initial_state(unit_square()), op(OpKind::Append, 0));
    auto o = step(make_genome(Family::NearestNeighbor), s);
    REQUIRE(o);
    CHECK(o->kind == OpKind::Insert);
    CHECK(o->args[0] == 1);
  }
  SUBCASE("two_opt on the square") {
    auto crossed = apply_all(initial_state(unit_square()),
                             {op(OpKind::Append, 0), op(OpKind::Append, 2), op(OpKind::Append, 1),
                              op(OpKind::Append, 3)});
    auto o = step(make_genome(Family::TwoOpt), crossed);
    REQUIRE(o);
    CHECK(o->kind == OpKind::ReverseSegment);
    CHECK(objective_value(apply_operation(crossed, *o)) < objective_value(crossed));

    auto good = apply_all(initial_state(unit_square()),
                          {op(OpKind::Append, 0), op(OpKind::Append, 1), op(OpKind::Append, 2),
                           op(OpKind::Append, 3)});
    CHECK_FALSE(step(make_genome(Family::TwoOpt), good));
  }
  SUBCASE("greedy_by_density prefers item 1") {
    auto inst = make_mkp("m", {10, 7}, {{3, 2}}, {4});
    auto o = step(make_genome(Family::GreedyByDensity), initial_state(inst));
    REQUIRE(o);
    CHECK(*o == op(OpKind::Add, 1));
  }
}

TEST_CASE("default genomes match textbook implementations") {
  const auto nn = make_genome(Family::NearestNeighbor);
  const auto ci = make_genome(Family::CheapestInsertion);
  const auto density = make_genome(Family::GreedyByDensity);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto inst = random_tsp(10, seed);
    auto s = random_partial_tour(inst, rng, static_cast<int>(rng.uniform_index(10)));
    CHECK(*step(nn, s) == ref_nearest_neighbor(s));
    CHECK(*step(ci, s) == ref_cheapest_insertion(s));

    auto mkp = random_mkp(12, 3, seed);
    auto ms = random_mkp_state(mkp, rng);
    CHECK(step(density, ms) == ref_greedy_density(ms));
  }
}

TEST_CASE("highest_delta_node matches exhaustive gain comparison") {
  const auto g = make_genome(Family::HighestDeltaNode);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto inst = random_maxcut(10, 0.5, seed, true);
    auto s = random_cut_state(inst, rng, 0.5);
    std::optional<OperationRecord> expected;
    double best = 0;
    for (int v = 0; v < 10; ++v) {
      if (s.cut().side[v] >= 0) continue;
      for (int side = 0; side < 2; ++side) {
        auto sides = s.cut().side;
        sides[v] = static_cast<std::int8_t>(side);
        const double gain = ref_cut(inst->maxcut(), sides) - ref_cut(inst->maxcut(), s.cut().side);
        if (!expected || gain > best + 1e-12) {
          expected = op(OpKind::AssignNode, v, side);
          best = gain;
        }
      }
    }
    CHECK(step(g, s) == expected);
  }
}

TEST_CASE("every heuristic returns applicable operations and completes its problem") {
  for (ProblemKind kind : {ProblemKind::Tsp, ProblemKind::Mkp, ProblemKind::MaxCut}) {
    for (const auto& g : default_pool(kind)) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        InstancePtr inst = kind == ProblemKind::Tsp   ? random_tsp(11, seed)
                           : kind == ProblemKind::Mkp ? random_mkp(14, 3, seed)
                                                      : random_maxcut(11, 0.4, seed, true);
        auto start = initial_state(inst);
        if (!g.info().constructive) {
          auto boot = kind == ProblemKind::Tsp   ? make_genome(Family::NearestNeighbor)
                      : kind == ProblemKind::Mkp ? make_genome(Family::GreedyByWeight)
                                                 : make_genome(Family::BalancedCut);
          start = run_heuristic_steps(start, boot, step_cap(*inst), seed).state;
        }
        auto burst = run_heuristic_steps(start, g, step_cap(*inst), seed);
        CHECK_MESSAGE(is_complete(burst.state), g.id);
        CHECK(validate_solution(*inst, burst.state.solution).valid);
      }
    }
  }
}

TEST_CASE("improvement heuristics never worsen the objective") {
  for (ProblemKind kind : {ProblemKind::Tsp, ProblemKind::Mkp, ProblemKind::MaxCut}) {
    for (const auto& g : default_pool(kind)) {
      if (g.info().constructive || g.family == Family::SimulatedAnnealing) continue;
      for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        InstancePtr inst;
        ProblemState s;
        if (kind == ProblemKind::Tsp) {
          inst = random_tsp(10, seed);
          s = random_partial_tour(inst, rng, 10);
        } else if (kind == ProblemKind::Mkp) {
          inst = random_mkp(12, 3, seed);
          s = random_mkp_state(inst, rng);
        } else {
          inst = random_maxcut(10, 0.5, seed, true);
          s = random_cut_state(inst, rng, 1.0);
        }
        for (int k = 0; k < 30; ++k) {
          auto o = step(g, s, seed);
          if (!o) break;
          auto next = apply_operation(s, *o);
          CHECK_MESSAGE(!is_better(objective_value(s), objective_value(next), s.inst().sense()), g.id);
          s = next;
        }
      }
    }
  }
}


TEST_CASE("local search fixpoints admit no improving neighbor") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    Rng rng(seed);
    auto tsp = random_tsp(12, seed);
    auto tour = random_partial_tour(tsp, rng, 12);

    auto two = run_to_fixpoint(make_genome(Family::TwoOpt), tour);
    CHECK_FALSE(any_improving(two, applicable_operations(two, OpKind::ReverseSegment)));

    auto three = run_to_fixpoint(make_genome(Family::ThreeOpt), tour);
    auto moves = applicable_operations(three, OpKind::ReverseSegment);
    for (const auto& o : applicable_operations(three, OpKind::Relocate)) {
      if (o.args[1] <= 3) moves.push_back(o);
    }
    CHECK_FALSE(any_improving(three, moves));

    auto mkp = random_mkp(12, 3, seed);
    auto ms = random_mkp_state(mkp, rng);
    auto kf = run_to_fixpoint(make_genome(Family::KFlip), ms);
    auto kmoves = applicable_operations(kf, OpKind::Toggle);
    for (const auto& o : applicable_operations(kf, OpKind::SwapItem)) kmoves.push_back(o);
    CHECK_FALSE(any_improving(kf, kmoves));
    // Pairs of simultaneous flips, checked directly on the membership vector.
    const auto& d = mkp->mkp();
    const double base = objective_value(kf);
    for (int a = 0; a < d.n; ++a) {
      for (int b = a + 1; b < d.n; ++b) {
        auto inc = kf.mkp().included;
        inc[a] = !inc[a];
        inc[b] = !inc[b];
        bool ok = true;
        double profit = 0;
        for (int r = 0; r < d.m && ok; ++r) {
          double used = 0;
          for (int i = 0; i < d.n; ++i) used += inc[i] ? d.w(r, i) : 0.0;
          ok = used <= d.capacities[r];
        }
        for (int i = 0; i < d.n; ++i) profit += inc[i] ? d.profits[i] : 0.0;
        CHECK_FALSE((ok && profit > base + 1e-9));
      }
    }

    auto bf = run_to_fixpoint(make_genome(Family::BlockFlip), ms);
    auto bmoves = applicable_operations(bf, OpKind::FlipBlock);
    std::erase_if(bmoves, [](const OperationRecord& o) { return o.args[1] > 3; });
    CHECK_FALSE(any_improving(bf, bmoves));

    auto cut = random_maxcut(10, 0.5, seed, true);
    auto cs = random_cut_state(cut, rng, 1.0);
    auto ms2 = run_to_fixpoint(make_genome(Family::MultiSwap2), cs);
    auto cmoves = applicable_operations(ms2, OpKind::AssignNode);
    for (const auto& o : applicable_operations(ms2, OpKind::SwapNode)) cmoves.push_back(o);
    CHECK_FALSE(any_improving(ms2, cmoves));

    auto gs = run_to_fixpoint(make_genome(Family::GreedySwap), cs);
    CHECK_FALSE(any_improving(gs, applicable_operations(gs, OpKind::SwapNode)));
  }
}

TEST_CASE("simulated annealing follows its acceptance rule") {
  auto inst = random_maxcut(12, 0.5, 9, true);
  Rng setup(9);
  auto s = random_cut_state(inst, setup, 1.0);
  const auto g = make_genome(Family::SimulatedAnnealing);
  AlgorithmData data;
  Rng rng(123);
  Rng mirror(123);
  const auto& side = s.cut().side;
  auto flip_gain = [&](const std::vector<std::int8_t>& sd, int v) {
    auto t = sd;
    t[v] = static_cast<std::int8_t>(1 - t[v]);
    return ref_cut(inst->maxcut(), t) - ref_cut(inst->maxcut(), sd);
  };
  double total = 0;
  for (int k = 0; k < 100; ++k) total += std::abs(flip_gain(side, static_cast<int>(mirror.uniform_index(12))));
  double temperature = total / 100;
  ProblemState cur = s;
  for (int call = 0; call < 20; ++call) {
    auto o = heuristic_step(g, cur, data, rng).operation;
    std::optional<OperationRecord> expected;
    for (int p = 0; p < 10 && !expected; ++p) {
      const int v = static_cast<int>(mirror.uniform_index(12));
      const double delta = flip_gain(cur.cut().side, v);
      if (delta > 0 || mirror.uniform01() < std::exp(delta / temperature)) {
        expected = op(OpKind::AssignNode, v, 1 - cur.cut().side[v]);
      }
    }
    temperature *= 0.95;
    REQUIRE(o == expected);
    if (o) cur = apply_operation(cur, *o);
  }
}

TEST_CASE("greedy edge follows a consistent plan") {
  auto inst = random_tsp(15, 5);
  auto burst = run_heuristic_steps(initial_state(inst), make_genome(Family::GreedyEdge), 20, 1);
  CHECK(burst.applied == 15);
  CHECK(is_complete(burst.state));
}

TEST_CASE("evolved nearest neighbor variants") {
  auto inst = random_tsp(30, 2);
  auto base = make_genome(Family::NearestNeighbor);
  auto evolved = mutate_genome(base, {"s1", Family::NearestNeighbor,
                                      {{"sub_central_start", 1}, {"future_cost_weight", 1},
                                       {"best_position_insertion", 1}, {"limit_candidates", 1},
                                       {"periodic_2opt", 1}},
                                      ""});
  auto burst = run_heuristic_steps(initial_state(inst), evolved, step_cap(*inst), 1);
  CHECK(is_complete(burst.state));
  CHECK(validate_solution(*inst, burst.state.solution).valid);
}

TEST_CASE("mutate_genome") {
  const auto base = make_genome(Family::NearestNeighbor);
  CHECK(base.param("threshold_factor") == 0.70);
  CHECK(base.param("apply_2opt_frequency") == 5);

  auto g = mutate_genome(base, {"s1", Family::NearestNeighbor, {{"threshold_factor", 0.55}}, ""});
  CHECK(g.param("threshold_factor") == 0.55);
  CHECK(g.id != base.id);
  CHECK(g.lineage == std::vector<std::string>{"s1"});

  auto p = mutate_genome(base, {"s2", Family::NearestNeighbor,
                                {{"periodic_2opt", 1}, {"apply_2opt_frequency", 5}}, ""});
  CHECK(p.flag("periodic_2opt"));
  CHECK(p.param("apply_2opt_frequency") == 5);

  auto c = mutate_genome(base, {"s3", Family::NearestNeighbor, {{"threshold_factor", 9}}, ""});
  CHECK(c.param("threshold_factor") == 2.0);
  CHECK(c.lineage.front() == "clamp:threshold_factor");

  try {
    mutate_genome(base, {"s4", Family::NearestNeighbor, {{"use_magic", 1}}, ""});
    FAIL("expected UnknownTarget");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownTarget);
  }
  CHECK_THROWS_AS(mutate_genome(base, {"s5", Family::TwoOpt, {}, ""}), Error);
}

TEST_CASE("genome text and json") {
  auto g = mutate_genome(make_genome(Family::Grasp), {"s1", Family::Grasp, {{"rcl_alpha", 0.45}}, ""});
  auto back = genome_from_text(genome_to_text(g));
  CHECK(back.same_behavior(g));
  CHECK(back.id == g.id);
  CHECK(back.lineage == g.lineage);
  const auto json = genome_to_json(g);
  CHECK(json.find("\"family\":\"grasp\"") != std::string::npos);
  CHECK(json.find("\"rcl_alpha\":0.45") != std::string::npos);
}
