#include <benchmark/benchmark.h>

#include "enlab/batch.hpp"
#include "enlab/calculus.hpp"
#include "enlab/rng.hpp"
#include "enlab/sc_checker.hpp"

namespace {

using namespace enlab;

// One counterexample path: simulate, build the Azema triple, check SC on [0, tau].
double weighted_path(std::size_t i) {
  const WeightedJumpTimeModel model{0.5, 0.5, 1.0};
  const MarketModel market{1.0, 0.5, 1.0};
  const auto counts = simulate_weighted_counts(model, 1.0, 1.0, path_seed(11, i));
  const auto az = azema_weighted(counts, model);
  const auto X = stochastic_exponential(counts, market);
  return check_sc(g_drift_stopped(X, market, az)).residual;
}

double last_passage_path(std::size_t i) {
  static const LastPassageModel model{0.5, 1.0, 1.0};
  static const RuinFunction psi = model.ruin();
  const auto counts = simulate_certified_counts(model, psi, 5.0, path_seed(13, i));
  const auto az = azema_last_passage(counts, model, psi);
  const auto X = stochastic_exponential(counts, model.market());
  return check_sc(g_drift_bracket_after(X, model.market(), az)).residual;
}

template <double (*Fn)(std::size_t)>
void run(benchmark::State& state, Execution mode) {
  const auto n = static_cast<std::size_t>(state.range(0));
  BatchOptions opt;
  opt.execution = mode;
  for (auto _ : state) {
    auto out = map_paths<double>(n, Fn, opt);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = mode == Execution::serial ? 1 : resolve_threads(opt);
}

void BM_WeightedSerial(benchmark::State& s) { run<weighted_path>(s, Execution::serial); }
void BM_WeightedParallel(benchmark::State& s) { run<weighted_path>(s, Execution::parallel); }
void BM_LastPassageSerial(benchmark::State& s) { run<last_passage_path>(s, Execution::serial); }
void BM_LastPassageParallel(benchmark::State& s) { run<last_passage_path>(s, Execution::parallel); }

BENCHMARK(BM_WeightedSerial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeightedParallel)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LastPassageSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LastPassageParallel)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
