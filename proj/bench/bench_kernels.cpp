// Serial reference vs parallel kernels, full vs separable correlation, beam iteration vs range stacking.

#include "lidarsim/convolve.hpp"
#include "lidarsim/parallel.hpp"
#include "lidarsim/reference.hpp"
#include "lidarsim/simulate.hpp"

#include "../tests/test_support.hpp"

#include <benchmark/benchmark.h>

using namespace lidarsim;

namespace
{

Plane random_plane(int side)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Plane p(side, side);
    for (auto& x : p.values)
        x = u(rng);
    return p;
}

AngularGrid bench_kernel(int side)
{
    const double step = deg2rad(0.01);
    return gaussian_kernel(step * side / 8.0, step * side / 6.0, 3.0, step);
}

void BM_CorrelateSerial(benchmark::State& st)
{
    const Plane in = random_plane(static_cast<int>(st.range(0)));
    const AngularGrid k = bench_kernel(static_cast<int>(st.range(1)));
    for (auto _ : st)
        benchmark::DoNotOptimize(reference::correlate_serial(in, k));
}

void BM_CorrelateParallel(benchmark::State& st)
{
    ScopedWorkers w(static_cast<int>(st.range(2)));
    const Plane in = random_plane(static_cast<int>(st.range(0)));
    const AngularGrid k = bench_kernel(static_cast<int>(st.range(1)));
    Plane out(in.width, in.height);
    for (auto _ : st)
    {
        correlate_full(in, k, Rect::full(in), out);
        benchmark::DoNotOptimize(out.values.data());
    }
}

void BM_CorrelateSeparable(benchmark::State& st)
{
    ScopedWorkers w(static_cast<int>(st.range(2)));
    const Plane in = random_plane(static_cast<int>(st.range(0)));
    const SeparableKernel sep = rank1_approximation(bench_kernel(static_cast<int>(st.range(1))));
    Plane out(in.width, in.height);
    for (auto _ : st)
    {
        correlate_separable(in, sep, Rect::full(in), out);
        benchmark::DoNotOptimize(out.values.data());
    }
}

struct SimFixture
{
    GBuffer g;
    AngularGrid k;
    ScanPattern p;
    SimConfig c;

    SimFixture()
    {
        std::mt19937_64 rng(3);
        g = testsupport::random_gbuffer(256, 256, 0.05, rng);
        k = gaussian_kernel(deg2rad(0.1), deg2rad(0.1), 3.0, deg2rad(0.05));
        p = testsupport::pixel_center_pattern(g.projection, 4);
        c.delta_r = 0.5;
        c.r_max = 25.0;
    }
};

void BM_BeamIteration(benchmark::State& st)
{
    ScopedWorkers w(static_cast<int>(st.range(0)));
    const SimFixture f;
    for (auto _ : st)
        benchmark::DoNotOptimize(beam_iteration(f.g, f.k, f.p, f.c));
}

void BM_RangeStacking(benchmark::State& st)
{
    ScopedWorkers w(static_cast<int>(st.range(0)));
    const SimFixture f;
    for (auto _ : st)
        benchmark::DoNotOptimize(sample_beams(range_stacking(f.g, f.k, f.c), f.p, f.g.projection, f.c));
}

void BM_RangeStackingSerial(benchmark::State& st)
{
    const SimFixture f;
    for (auto _ : st)
        benchmark::DoNotOptimize(reference::range_stacking_serial(f.g, f.k, f.c));
}

} // namespace

BENCHMARK(BM_CorrelateSerial)->Args({256, 33})->Args({512, 65})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrelateParallel)->Args({256, 33, 1})->Args({256, 33, 4})->Args({512, 65, 1})->Args({512, 65, 4})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorrelateSeparable)->Args({256, 33, 1})->Args({512, 65, 1})->Args({512, 65, 4})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BeamIteration)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RangeStacking)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RangeStackingSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
