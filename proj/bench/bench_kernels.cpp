// OpenMP kernels against their serial reference versions at training shapes.

#include <benchmark/benchmark.h>

#include <vector>

#include "hnmvts/kernels.hpp"
#include "hnmvts/rng.hpp"

namespace {

using hnmvts::Real;
namespace k = hnmvts::kernels;

std::vector<Real> filled(std::size_t n, std::uint64_t seed) {
    hnmvts::Rng rng(seed);
    std::vector<Real> v(n);
    for (auto& e : v) e = static_cast<Real>(rng.uniform(-1, 1));
    return v;
}

template <auto Kernel>
void gemm(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0)), n = m, kk = m;
    const auto a = filled(m * kk, 1), b = filled(kk * n, 2);
    std::vector<Real> c(m * n);
    for (auto _ : state) {
        Kernel(m, kk, n, a.data(), b.data(), c.data());
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * n * kk));
}

// DLinear final layer at the ETTm2 shape: batch 64, N = 7, H = 96, D = 336.
template <auto Kernel>
void channel_linear(benchmark::State& state) {
    const k::ChannelLinearDims d{static_cast<std::size_t>(state.range(0)), 7, 96, 336, 7};
    const auto h = filled(d.batch * d.channels * d.in, 3), w = filled(d.w_channels * d.out * d.in, 4);
    std::vector<Real> y(d.batch * d.channels * d.out);
    for (auto _ : state) {
        Kernel(d, h.data(), w.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * d.batch * d.channels * d.out * d.in));
}

template <auto Kernel>
void channel_linear_grad_weight(benchmark::State& state) {
    const k::ChannelLinearDims d{static_cast<std::size_t>(state.range(0)), 7, 96, 336, 7};
    const auto dy = filled(d.batch * d.channels * d.out, 5), h = filled(d.batch * d.channels * d.in, 6);
    std::vector<Real> dw(d.w_channels * d.out * d.in);
    for (auto _ : state) {
        Kernel(d, dy.data(), h.data(), dw.data());
        benchmark::DoNotOptimize(dw.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * d.batch * d.channels * d.out * d.in));
}

// DLinear decomposition: batch 64 x 7 rows of length 336, kernel 25.
template <auto Kernel>
void moving_average(benchmark::State& state) {
    const std::size_t rows = static_cast<std::size_t>(state.range(0)) * 7, len = 336, kernel = 25;
    const auto x = filled(rows * len, 7);
    std::vector<Real> y(rows * len);
    for (auto _ : state) {
        Kernel(rows, len, kernel, x.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows * len));
}

} // namespace

BENCHMARK(gemm<k::gemm_nn>)->Name("gemm_nn/omp")->Arg(64)->Arg(256);
BENCHMARK(gemm<k::reference::gemm_nn>)->Name("gemm_nn/reference")->Arg(64)->Arg(256);
BENCHMARK(channel_linear<k::channel_linear>)->Name("channel_linear/omp")->Arg(1)->Arg(64);
BENCHMARK(channel_linear<k::reference::channel_linear>)->Name("channel_linear/reference")->Arg(1)->Arg(64);
BENCHMARK(channel_linear_grad_weight<k::channel_linear_grad_weight>)->Name("channel_linear_grad_weight/omp")->Arg(64);
BENCHMARK(channel_linear_grad_weight<k::reference::channel_linear_grad_weight>)
    ->Name("channel_linear_grad_weight/reference")
    ->Arg(64);
BENCHMARK(moving_average<k::moving_average>)->Name("moving_average/omp")->Arg(64);
BENCHMARK(moving_average<k::reference::moving_average>)->Name("moving_average/reference")->Arg(64);

BENCHMARK_MAIN();
