#include <chrono>
#include <cstdio>
#include <functional>

#include <CLI11.hpp>

#ifdef HH_HAVE_OPENMP
#include <omp.h>
#endif

#include "hh/envs.hpp"
#include "hh/evolution.hpp"
#include "hh/heuristics.hpp"
#include "hh/io.hpp"
#include "hh/selector.hpp"

using namespace hh;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const char* kernel, double serial, double parallel, bool same) {
  std::printf("%-18s %12.4f %12.4f %8.2fx  %s\n", kernel, serial * 1e3, parallel * 1e3, serial / parallel,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial reference vs parallel kernels"};
  int size = 100, rollouts = 64, trials = 200, reps = 3;
  std::uint64_t seed = 1;
  app.add_option("--size", size, "TSP nodes");
  app.add_option("--rollouts", rollouts, "Rollouts per candidate");
  app.add_option("--trials", trials, "Perturbation trials");
  app.add_option("--reps", reps, "Timed repetitions");
  app.add_option("--seed", seed, "Instance and kernel seed");
  CLI11_PARSE(app, argc, argv);

  const auto inst = generate_instance(ProblemKind::Tsp, size, seed);
  const auto pool = default_pool(ProblemKind::Tsp);
  const auto state = initial_state(inst);
  int threads = 1;
#ifdef HH_HAVE_OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("tsp n=%d, %d threads\n", size, threads);
  std::printf("%-18s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");

  SelectorConfig sc;
  sc.rollouts_per_candidate = rollouts;
  sc.parallel = true;
  ValueEstimate a, b;
  const double ts = seconds([&] { a = mc_evaluate_serial(state, pool[0], pool, sc, seed); }, reps);
  const double tp = seconds([&] { b = mc_evaluate(state, pool[0], pool, sc, seed); }, reps);
  row("mc_evaluate", ts, tp, a.rollout_costs == b.rollout_costs && a.q_hat == b.q_hat);

  EvolutionConfig ec;
  ec.max_perturbation_trials = trials;
  ec.parallel = true;
  const auto basic = generate_basic(pool[0], inst, ec, seed);
  std::optional<ContrastiveRecord> ca, cb;
  const double cs = seconds([&] { ca = find_contrastive_serial(basic, pool[0], ec, seed); }, reps);
  const double cp = seconds([&] { cb = find_contrastive(basic, pool[0], ec, seed); }, reps);
  const bool same = ca.has_value() == cb.has_value() && (!ca || (ca->trial == cb->trial && ca->cost_delta == cb->cost_delta));
  row("find_contrastive", cs, cp, same);
  return 0;
}
