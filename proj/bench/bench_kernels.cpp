#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "hdd/kernels.hpp"

namespace {

namespace k = hdd::kernels;
namespace ks = hdd::kernels::serial;

std::vector<double> filled(std::size_t n, double phase) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(0.37 * static_cast<double>(i) + phase);
  return v;
}

// Args: side length, width (channels in and out).
template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), c = static_cast<int>(state.range(1));
  const auto in = filled(static_cast<std::size_t>(c) * n * n, 0.1);
  const auto w = filled(static_cast<std::size_t>(c) * c * 9, 0.2);
  const auto b = filled(c, 0.3);
  std::vector<double> out(in.size());
  for (auto _ : state) {
    if constexpr (Parallel) k::conv3x3_forward(in, c, n, n, w, b, out, c);
    else ks::conv3x3_forward(in, c, n, n, w, b, out, c);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.size()) * c * 9);
}

template <bool Parallel>
void BM_ConvBackwardParams(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), c = static_cast<int>(state.range(1));
  const auto in = filled(static_cast<std::size_t>(c) * n * n, 0.1);
  const auto go = filled(in.size(), 0.4);
  std::vector<double> gw(static_cast<std::size_t>(c) * c * 9), gb(c);
  for (auto _ : state) {
    if constexpr (Parallel) k::conv3x3_backward_params(in, c, n, n, go, c, gw, gb);
    else ks::conv3x3_backward_params(in, c, n, n, go, c, gw, gb);
    benchmark::DoNotOptimize(gw.data());
  }
}

template <bool Parallel>
void BM_Resample(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto in = filled(static_cast<std::size_t>(n) * n, 0.5);
  const int m = 4 * n;
  std::vector<double> out(static_cast<std::size_t>(m) * m);
  for (auto _ : state) {
    if constexpr (Parallel) k::resample_bilinear(in, 1, n, n, out, m, m);
    else ks::resample_bilinear(in, 1, n, n, out, m, m);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

template <bool Parallel>
void BM_Softplus(benchmark::State& state) {
  const auto in = filled(static_cast<std::size_t>(state.range(0)), 0.6);
  std::vector<double> out(in.size());
  for (auto _ : state) {
    if constexpr (Parallel) k::softplus(in, out);
    else ks::softplus(in, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/serial")->Args({64, 32})->Args({128, 32});
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/openmp")->Args({64, 32})->Args({128, 32});
BENCHMARK(BM_ConvBackwardParams<false>)->Name("conv_backward_params/serial")->Args({64, 32});
BENCHMARK(BM_ConvBackwardParams<true>)->Name("conv_backward_params/openmp")->Args({64, 32});
BENCHMARK(BM_Resample<false>)->Name("resample/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Resample<true>)->Name("resample/openmp")->Arg(64)->Arg(256);
BENCHMARK(BM_Softplus<false>)->Name("softplus/serial")->Arg(1 << 17)->Arg(1 << 20);
BENCHMARK(BM_Softplus<true>)->Name("softplus/openmp")->Arg(1 << 17)->Arg(1 << 20);

BENCHMARK_MAIN();
