#include <doctest.h>

#include <cmath>
#include <map>

#include <json.hpp>

#include "hh/engine.hpp"
#include "hh/selector.hpp"
#include "support.hpp"

using namespace hh;
using namespace hh::test;

namespace {

std::vector<HeuristicGenome> pick(const std::vector<Family>& families) {
  std::vector<HeuristicGenome> out;
  for (Family f : families) out.push_back(make_genome(f));
  return out;
}

ValueEstimate est(const std::string& id, double q) { return {id, q, {q}, 0}; }

class FixedAdvisor : public Advisor {
 public:
  explicit FixedAdvisor(std::string reply) : reply_(std::move(reply)) {}
  std::string complete(const AdvisorRequest&) override { return reply_; }
  std::string backend_name() const override { return "fixed"; }

 private:
  std::string reply_;
};

class DownAdvisor : public Advisor {
 public:
  std::string complete(const AdvisorRequest&) override {
    throw Error(Errc::AdvisorUnavailable, "down");
  }
  std::string backend_name() const override { return "down"; }
};

std::vector<int> ref_nn_tour(const TspData& d) {
  std::vector<int> tour{0};
  std::vector<char> seen(d.n, 0);
  seen[0] = 1;
  while (static_cast<int>(tour.size()) < d.n) {
    int best = -1;
    for (int v = 0; v < d.n; ++v) {
      if (!seen[v] && (best < 0 || d.d(tour.back(), v) < d.d(tour.back(), best))) best = v;
    }
    seen[best] = 1;
    tour.push_back(best);
  }
  return tour;
}

}  // namespace

TEST_CASE("mc_evaluate") {
  SelectorConfig cfg;
  const auto tsp_pool = default_pool(ProblemKind::Tsp);

  SUBCASE("two-node instance has a unique completion") {
    const auto inst = make_tsp_from_coords("two", {{0, 0}, {3, 4}}, EdgeWeightType::Euc2d);
    const auto s = initial_state(inst);
    for (const auto& h : tsp_pool) {
      for (int t : {1, 7, 25}) {
        cfg.rollouts_per_candidate = t;
        const auto e = mc_evaluate(s, h, tsp_pool, cfg, 11);
        CHECK(e.q_hat == 10.0);
        CHECK(e.rollout_costs.size() == static_cast<std::size_t>(t));
        for (double c : e.rollout_costs) CHECK(c == 10.0);
      }
    }
  }

  SUBCASE("same seed gives identical rollouts") {
    const auto s = initial_state(random_tsp(12, 3));
    const auto a = mc_evaluate(s, tsp_pool[0], tsp_pool, cfg, 99);
    const auto b = mc_evaluate(s, tsp_pool[0], tsp_pool, cfg, 99);
    CHECK(a.rollout_costs == b.rollout_costs);
    CHECK(a.q_hat == b.q_hat);
  }

  SUBCASE("q_hat is the mean of rollout costs") {
    const auto s = initial_state(random_tsp(10, 4));
    const auto e = mc_evaluate(s, tsp_pool[6], tsp_pool, cfg, 5);
    double sum = 0;
    for (double c : e.rollout_costs) sum += c;
    CHECK(e.q_hat == doctest::Approx(sum / e.rollout_costs.size()).epsilon(1e-15));
  }

  SUBCASE("parallel kernel is bit-identical to the serial reference") {
    for (ProblemKind kind : {ProblemKind::Tsp, ProblemKind::Mkp, ProblemKind::MaxCut}) {
      const auto inst = kind == ProblemKind::Tsp   ? random_tsp(15, 21)
                        : kind == ProblemKind::Mkp ? random_mkp(20, 3, 21)
                                                   : random_maxcut(16, 0.4, 21, true);
      const auto pool = default_pool(kind);
      const auto s = initial_state(inst);
      for (bool crn : {true, false}) {
        cfg.common_random_numbers = crn;
        cfg.parallel = true;
        for (const auto& h : pool) {
          const auto par = mc_evaluate(s, h, pool, cfg, 7);
          const auto ser = mc_evaluate_serial(s, h, pool, cfg, 7);
          CHECK(par.rollout_costs == ser.rollout_costs);
          CHECK(par.q_hat == ser.q_hat);
        }
      }
    }
  }

  SUBCASE("common random numbers share rollout seeds across candidates") {
    CHECK(rollout_seed(1, "a", 3, true) == rollout_seed(1, "b", 3, true));
    CHECK(rollout_seed(1, "a", 3, false) != rollout_seed(1, "b", 3, false));
    CHECK(rollout_seed(1, "a", 3, true) != rollout_seed(1, "a", 4, true));
  }
}

TEST_CASE("mc_evaluate converges to the exact completion expectation") {
  // Four asymmetric points and rng-free constructive heuristics, so the
  // random completion process has a small exactly enumerable distribution.
  const auto inst = make_tsp_from_coords("four", {{0, 0}, {10, 1}, {3, 7}, {12, 9}},
                                         EdgeWeightType::Exact);
  const auto pool = pick({Family::NearestNeighbor, Family::CheapestInsertion,
                          Family::FarthestInsertion, Family::NearestInsertion});
  SelectorConfig cfg;
  cfg.m_steps = 1;
  cfg.rollouts_per_candidate = 10000;
  const auto s0 = initial_state(inst);
  const auto h = pool[0];
  const auto after = run_heuristic_steps(s0, h, 1, 0).state;
  const double exact = exact_completion_expectation(after, pool, 0);

  // The process must not be degenerate for the check to mean anything.
  const auto spread = mc_evaluate(s0, h, pool, cfg, 1).rollout_costs;
  CHECK(*std::max_element(spread.begin(), spread.end()) >
        *std::min_element(spread.begin(), spread.end()));

  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto e = mc_evaluate(s0, h, pool, cfg, seed);
    if (std::abs(e.q_hat - exact) / exact < 0.01) ++within;
  }
  CHECK(within >= 99);
}

TEST_CASE("argbest and select_heuristic") {
  CHECK(argbest({est("A", 10), est("B", 12)}, ObjectiveSense::Minimize) == 0);
  CHECK(argbest({est("A", 10), est("B", 10)}, ObjectiveSense::Minimize) == 0);
  CHECK(argbest({est("A", 90), est("B", 95)}, ObjectiveSense::Maximize) == 1);
  CHECK_THROWS_AS(argbest({}, ObjectiveSense::Minimize), Error);

  SUBCASE("positive scaling leaves the choice unchanged") {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<ValueEstimate> a, b;
      const double k = 0.01 + rng.uniform01() * 100;
      const int n = 1 + static_cast<int>(rng.uniform_index(8));
      for (int i = 0; i < n; ++i) {
        const double q = static_cast<double>(rng.uniform_int(0, 20));
        a.push_back(est(std::to_string(i), q));
        b.push_back(est(std::to_string(i), q * k));
      }
      for (auto sense : {ObjectiveSense::Minimize, ObjectiveSense::Maximize}) {
        CHECK(argbest(a, sense) == argbest(b, sense));
      }
    }
  }

  SUBCASE("select returns the argbest of its own estimates") {
    const auto pool = default_pool(ProblemKind::Tsp);
    const auto s = initial_state(random_tsp(12, 8));
    SelectorConfig cfg;
    std::vector<std::size_t> cands{0, 1, 2, 5, 6};
    const auto sel = select_heuristic(s, pool, cands, cfg, 3, 17);
    REQUIRE(sel.estimates.size() == cands.size());
    double best = sel.estimates[0].q_hat;
    for (const auto& e : sel.estimates) best = std::min(best, e.q_hat);
    std::size_t first = 0;
    while (sel.estimates[first].q_hat != best) ++first;
    CHECK(sel.index == cands[first]);
    CHECK_THROWS_AS(select_heuristic(s, pool, {}, cfg, 3, 17), Error);
    cfg.rollouts_per_candidate = 0;
    CHECK(select_heuristic(s, pool, {5, 2}, cfg, 3, 17).index == 5);
  }
}

TEST_CASE("filter_candidates") {
  const auto pool = default_pool(ProblemKind::Tsp);
  const auto s = initial_state(random_tsp(8, 1));
  SelectorConfig cfg;

  cfg.filter_mode = FilterMode::Passthrough;
  CHECK(filter_candidates(s, pool, cfg, nullptr).indices.size() == pool.size());

  cfg.filter_mode = FilterMode::Advisor;
  FixedAdvisor two("two_opt, nearest_neighbor, not_a_heuristic");
  const auto f = filter_candidates(s, pool, cfg, &two);
  REQUIRE(f.indices.size() == 2);
  CHECK(pool[f.indices[0]].info().name == "nearest_neighbor");
  CHECK(pool[f.indices[1]].info().name == "two_opt");
  CHECK_FALSE(f.fallback);

  FixedAdvisor unknown("quantum_annealer");
  const auto g = filter_candidates(s, pool, cfg, &unknown);
  CHECK(g.fallback);
  CHECK(g.indices.size() == pool.size());

  DownAdvisor down;
  CHECK(filter_candidates(s, pool, cfg, &down).fallback);
  CHECK(filter_candidates(s, pool, cfg, nullptr).fallback);

  cfg.filter_mode = FilterMode::StaticTopK;
  cfg.static_topk = 3;
  const auto k = filter_candidates(s, pool, cfg, nullptr);
  REQUIRE(k.indices.size() == 3);
  CHECK(std::is_sorted(k.indices.begin(), k.indices.end()));
  int worst_kept = 0;
  for (auto i : k.indices) worst_kept = std::max(worst_kept, pool[i].info().evaluation_cost_rank);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (std::find(k.indices.begin(), k.indices.end(), i) == k.indices.end()) {
      CHECK(pool[i].info().evaluation_cost_rank >= worst_kept);
    }
  }
}

TEST_CASE("solve_instance") {
  SelectorConfig cfg;
  cfg.master_seed = 4;

  SUBCASE("four nodes with the full pool reach the optimal tour") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto inst = random_tsp(4, seed + 100);
      const auto r = solve_instance(inst, default_pool(ProblemKind::Tsp), cfg);
      CHECK(r.trajectory.terminal_cost == doctest::Approx(brute_force_tsp(inst->tsp())));
    }
  }

  SUBCASE("nearest neighbor alone reproduces its construction") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto inst = random_tsp(15, seed + 200);
      const auto r = solve_instance(inst, pick({Family::NearestNeighbor}), cfg);
      CHECK(r.trajectory.terminal_cost ==
            doctest::Approx(ref_tour_length(inst->tsp(), ref_nn_tour(inst->tsp()))));
    }
  }

  SUBCASE("trajectory replays to the reported cost") {
    for (ProblemKind kind : {ProblemKind::Tsp, ProblemKind::Mkp, ProblemKind::MaxCut}) {
      const auto inst = kind == ProblemKind::Tsp   ? random_tsp(12, 31)
                        : kind == ProblemKind::Mkp ? random_mkp(15, 3, 31)
                                                   : random_maxcut(12, 0.5, 31);
      const auto r = solve_instance(inst, default_pool(kind), cfg);
      const auto end = replay(r.trajectory);
      CHECK(is_complete(end));
      CHECK(validate_solution(*inst, end.solution).valid);
      CHECK(trajectory_cost(r.trajectory) == r.trajectory.terminal_cost);
      const int cap = step_cap(*inst);
      CHECK(static_cast<int>(r.decisions.size()) <= (cap + cfg.m_steps - 1) / cfg.m_steps);
      const auto again = solve_instance(inst, default_pool(kind), cfg);
      CHECK(again.trajectory.steps == r.trajectory.steps);
    }
  }

  SUBCASE("decision count respects max_decisions") {
    const auto inst = random_tsp(10, 5);
    cfg.max_decisions = 1;
    CHECK_THROWS_AS(solve_instance(inst, default_pool(ProblemKind::Tsp), cfg), Error);
    cfg.max_decisions = 4;
    const auto r = solve_instance(inst, default_pool(ProblemKind::Tsp), cfg);
    CHECK(r.decisions.size() <= 4);
  }

  SUBCASE("decision log records every estimate") {
    const auto inst = random_tsp(8, 6);
    const auto pool = default_pool(ProblemKind::Tsp);
    const auto r = solve_instance(inst, pool, cfg);
    REQUIRE_FALSE(r.decisions.empty());
    for (const auto& d : r.decisions) {
      CHECK(d.estimates.size() == d.candidates.size());
      const auto j = nlohmann::json::parse(decision_to_json(d));
      CHECK(j["chosen"] == d.chosen);
      CHECK(j["estimates"].size() == d.estimates.size());
      CHECK(j["features"].size() == d.features.size());
    }
  }

  SUBCASE("an expired time limit still returns a complete solution") {
    cfg.time_limit_seconds = 0.0;
    const auto r = solve_instance(random_tsp(10, 9), default_pool(ProblemKind::Tsp), cfg);
    CHECK(r.timed_out);
    CHECK(is_complete(replay(r.trajectory)));
  }
}
