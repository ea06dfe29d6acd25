// Serial reference vs OpenMP kernels, plus one end-to-end convolution.

#include "entlab/dynamics.hpp"
#include "entlab/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace entlab;

namespace {

std::vector<double> ramp(std::size_t n, double phase) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(-std::pow(std::sin(0.001 * i + phase), 2));
    return v;
}

void toeplitz(benchmark::State& state, kernels::Policy policy) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto w = ramp(n, 0.0);
    const auto lat = ramp(2 * n - 1, 0.3);
    std::vector<double> out(n);
    for (auto _ : state) {
        kernels::toeplitz_apply(policy, w, lat, out, 1);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

void pair(benchmark::State& state, kernels::Policy policy) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto p = ramp(n, 0.0);
    const auto q = ramp(n, 0.7);
    for (auto _ : state) {
        const double v = kernels::pair_expectation(policy, p, q, [](std::size_t i, std::size_t j) {
            const double d = 1e-3 * (static_cast<double>(i) - static_cast<double>(j));
            return d * d;
        });
        benchmark::DoNotOptimize(v);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}

void convolve(benchmark::State& state, kernels::Policy policy) {
    const GridDensity a = isotropize(build_density(FamilySpec::logistic(1.0)));
    const GridDensity b = isotropize(build_density(FamilySpec::gumbel(1.0)));
    ConvolutionOptions o;
    o.policy = policy;
    for (auto _ : state) benchmark::DoNotOptimize(rescaled_convolve(a, b, 0.4, o).mass());
}

} // namespace

BENCHMARK_CAPTURE(toeplitz, serial, kernels::Policy::serial)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(toeplitz, parallel, kernels::Policy::parallel)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(pair, serial, kernels::Policy::serial)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(pair, parallel, kernels::Policy::parallel)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(convolve, serial, kernels::Policy::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(convolve, parallel, kernels::Policy::parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
