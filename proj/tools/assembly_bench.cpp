// Serial reference assembly against the parallel kernel, and the matrix-free
// application of K, at a few grid sizes.
#include <benchmark/benchmark.h>

#include <omp.h>

#include "boltzinv/operator.hpp"

using namespace boltzinv;

namespace {

const FluidState kState{1.0, {0.0, 0.0, 0.0}, 1.0};

void BM_AssembleReference(benchmark::State& st) {
  const auto m = make_model(1.0);
  const auto g = build_grid(kState, 6.0, static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(assemble_reference(m, kState, g).K.data());
}

void BM_AssembleParallel(benchmark::State& st) {
  const auto m = make_model(1.0);
  const auto g = build_grid(kState, 6.0, static_cast<int>(st.range(0)));
  AssemblyOptions opt;
  opt.threads = omp_get_max_threads();
  for (auto _ : st) benchmark::DoNotOptimize(assemble(m, kState, g, opt).K.data());
}

void BM_AssembleParallelNoSymmetry(benchmark::State& st) {
  const auto m = make_model(1.0);
  const auto g = build_grid(kState, 6.0, static_cast<int>(st.range(0)));
  AssemblyOptions opt;
  opt.use_symmetry = false;
  for (auto _ : st) benchmark::DoNotOptimize(assemble(m, kState, g, opt).K.data());
}

void BM_MatrixFreeK(benchmark::State& st) {
  const auto m = make_model(1.0);
  const auto g = build_grid(kState, 6.0, static_cast<int>(st.range(0)));
  const auto f = sample(g, [](const Vec3& v) { return (1.0 + v.x) * sqrt_maxwellian(kState, v); });
  for (auto _ : st) benchmark::DoNotOptimize(apply_K_matrix_free(m, kState, f).values().data());
}

}  // namespace

BENCHMARK(BM_AssembleReference)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleParallel)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleParallelNoSymmetry)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatrixFreeK)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
