// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.
#include "tubeflow/berger.hpp"
#include "tubeflow/curvature.hpp"
#include "tubeflow/flow.hpp"
#include "tubeflow/suites.hpp"

#include <benchmark/benchmark.h>

using namespace tubeflow;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_certify_sign(benchmark::State& st) {
    PotentialHandle h = catalog("calabi_ball");
    SampleSpec region;
    region.kind = SampleSpec::Kind::Shell;
    region.count = 64;
    region.s_hi = 0.9;
    for (auto _ : st) benchmark::DoNotOptimize(certify_sign(h, Quantity::Abc, region, {}, exec_of(st)));
}

void BM_flow_rhs(benchmark::State& st) {
    Params p{{"amplitude", 0.05}, {"modes", 2.0}, {"k2_1", 1.0}, {"k2_2", 1.0}};
    FlowGrid g;
    g.points = 128;
    FlowState s = init_flow(catalog("quadratic_plus_periodic", p), g);
    for (auto _ : st) benchmark::DoNotOptimize(flow_rhs(s, s.u, exec_of(st)));
}

void BM_sphere_moments(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(sphere_moments(4, 200000, 5, exec_of(st)));
}

void BM_trace_suite(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(trace_suite(2000, 6, 2024, exec_of(st)));
}

void BM_null_vector_suite(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(null_vector_suite(20, 31, exec_of(st)));
}

}  // namespace

BENCHMARK(BM_certify_sign)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_flow_rhs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sphere_moments)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_trace_suite)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_null_vector_suite)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
