#include <benchmark/benchmark.h>

#include "fingeo/phantom.hpp"
#include "fingeo/surface.hpp"
#include "fingeo/texture.hpp"
#include "fingeo/unwarp.hpp"

namespace {

using namespace fingeo;

phantom::PhantomBundle hemisphere(int size) {
    phantom::PhantomSpec spec;
    spec.rx = spec.ry = spec.rz = (size - 2 * 10) / 2.0;
    spec.width = size;
    spec.height = size;
    return phantom::generate(spec);
}

void BM_IntegrateGradient(benchmark::State& state) {
    const auto b = hemisphere(static_cast<int>(state.range(0)));
    const auto zero = surface::find_zero_point(b.gradient, b.mask);
    for (auto _ : state) {
        auto depth = surface::integrate_gradient(b.gradient, b.mask, zero);
        benchmark::DoNotOptimize(depth.v.data());
    }
}
BENCHMARK(BM_IntegrateGradient)->Arg(160)->Arg(320);

void BM_MlsSmooth(benchmark::State& state) {
    const auto b = hemisphere(static_cast<int>(state.range(0)));
    const auto zero = surface::find_zero_point(b.gradient, b.mask);
    const auto rough = surface::integrate_gradient(b.gradient, b.mask, zero);
    for (auto _ : state) {
        auto depth = surface::mls_smooth(rough, b.mask);
        benchmark::DoNotOptimize(depth.v.data());
    }
}
BENCHMARK(BM_MlsSmooth)->Arg(160);

void BM_Unwarp(benchmark::State& state) {
    const auto b = hemisphere(static_cast<int>(state.range(0)));
    const auto zero = surface::find_zero_point(b.gradient, b.mask);
    const auto coords = unwarp::arc_length_coords(b.gradient, b.mask, zero);
    for (auto _ : state) {
        auto res = unwarp::unwarp_image(b.image, b.mask, coords, zero);
        benchmark::DoNotOptimize(res.image.pixels.data());
    }
}
BENCHMARK(BM_Unwarp)->Arg(160);

void BM_PeriodMap(benchmark::State& state) {
    const auto b = hemisphere(static_cast<int>(state.range(0)));
    const auto orient = texture::estimate_orientation_field(b.image, b.mask);
    for (auto _ : state) {
        auto period = texture::estimate_period_map(b.image, b.mask, orient.theta);
        benchmark::DoNotOptimize(period.v.data());
    }
}
BENCHMARK(BM_PeriodMap)->Arg(160);

} // namespace

BENCHMARK_MAIN();
