// Frame-parallel sweep against the serial reference, plus per-stage costs at
// the reference frame size.
#include <benchmark/benchmark.h>

#include <omp.h>

#include "otfs/bpic.hpp"
#include "otfs/ddip.hpp"
#include "otfs/sim.hpp"

using namespace otfs;

namespace {

SimConfig sweep_config(int M) {
  SimConfig cfg;
  cfg.M = M;
  cfg.l_max = M - 1;
  cfg.snr_db = {12.5};
  cfg.frames = 16;
  return cfg;
}

void BM_SweepParallel(benchmark::State& state) {
  const SimConfig cfg = sweep_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(cfg));
  state.counters["threads"] = omp_get_max_threads();
  state.counters["frames/s"] = benchmark::Counter(cfg.frames, benchmark::Counter::kIsIterationInvariantRate);
}

void BM_SweepSerial(benchmark::State& state) {
  const SimConfig cfg = sweep_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(cfg));
  state.counters["frames/s"] = benchmark::Counter(cfg.frames, benchmark::Counter::kIsIterationInvariantRate);
}

void BM_MakeFrame(benchmark::State& state) {
  const SimConfig cfg = sweep_config(12);
  std::uint64_t f = 0;
  for (auto _ : state) benchmark::DoNotOptimize(make_frame(cfg, 12.5, f++));
}

void BM_MmseBpic(benchmark::State& state) {
  const SimConfig cfg = sweep_config(12);
  const Frame frame = make_frame(cfg, 12.5, 0);
  const RealAlphabet alphabet = RealAlphabet::from(Constellation(cfg.qam));
  for (auto _ : state) {
    const BpicModel prepared(frame.model);
    benchmark::DoNotOptimize(run_bpic(prepared, mmse_denoise(prepared), cfg.T, alphabet));
  }
}

void BM_DdipFit(benchmark::State& state) {
  const SimConfig cfg = sweep_config(12);
  const Frame frame = make_frame(cfg, 12.5, 0);
  for (auto _ : state) {
    Rng rng(5);
    benchmark::DoNotOptimize(run_ddip(frame.model, cfg.ddip, rng));
  }
}

}  // namespace

BENCHMARK(BM_SweepParallel)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepSerial)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MakeFrame)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MmseBpic)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DdipFit)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
