// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// im2col + GEMM kernels against the serial reference loops.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gi/kernels.hpp"

namespace k = gi::kernels;

namespace {

std::vector<double> filled(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

// 0: input layer, 1: strided downsample, 2: 1D repeat block
k::Conv2dGeometry shape(int which) {
  k::Conv2dGeometry g;
  g.batch = 4;
  switch (which) {
    case 0:
      g.in_channels = 1, g.height = 36, g.width = 64, g.out_channels = 8;
      g.kernel_h = 3, g.kernel_w = 9, g.pad_h = 1, g.pad_w = 4;
      break;
    case 1:
      g.in_channels = 4, g.height = 36, g.width = 64, g.out_channels = 16;
      g.kernel_h = 4, g.kernel_w = 8, g.stride_h = 2, g.stride_w = 2, g.pad_h = 1, g.pad_w = 3;
      break;
    default:
      g.in_channels = 64, g.height = 1, g.width = 16, g.out_channels = 128;
      g.kernel_w = 5, g.pad_w = 2;
      break;
  }
  return g;
}

template <auto Fn>
void forward(benchmark::State& st) {
  const auto g = shape(static_cast<int>(st.range(0)));
  const auto x = filled(g.input_size(), 1), w = filled(g.weight_size(), 2);
  std::vector<double> out(g.output_size());
  for (auto _ : st) {
    Fn(g, x, w, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<int64_t>(g.output_size()));
}

template <auto Fn>
void backward_input(benchmark::State& st) {
  const auto g = shape(static_cast<int>(st.range(0)));
  const auto dout = filled(g.output_size(), 3), w = filled(g.weight_size(), 2);
  std::vector<double> dx(g.input_size());
  for (auto _ : st) {
    Fn(g, dout, w, dx);
    benchmark::DoNotOptimize(dx.data());
  }
}

template <auto Fn>
void backward_weight(benchmark::State& st) {
  const auto g = shape(static_cast<int>(st.range(0)));
  const auto dout = filled(g.output_size(), 3), x = filled(g.input_size(), 1);
  std::vector<double> dw(g.weight_size());
  for (auto _ : st) {
    Fn(g, dout, x, dw);
    benchmark::DoNotOptimize(dw.data());
  }
}

template <auto Fn>
void transpose_forward(benchmark::State& st) {
  k::ConvTranspose2dGeometry g;
  g.batch = 4, g.in_channels = 16, g.height = 9, g.width = 16, g.out_channels = 8;
  g.kernel_h = 4, g.kernel_w = 4, g.stride_h = 2, g.stride_w = 2, g.pad_h = 1, g.pad_w = 1;
  const auto x = filled(static_cast<std::size_t>(g.batch) * g.in_channels * g.height * g.width, 1);
  const auto w = filled(static_cast<std::size_t>(g.in_channels) * g.out_channels * g.kernel_h * g.kernel_w, 2);
  std::vector<double> out(static_cast<std::size_t>(g.batch) * g.out_channels * g.out_height() * g.out_width());
  for (auto _ : st) {
    Fn(g, x, w, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(forward<k::conv2d_forward>)->Name("conv2d_forward/fast")->DenseRange(0, 2);
BENCHMARK(forward<k::reference::conv2d_forward>)->Name("conv2d_forward/reference")->DenseRange(0, 2);
BENCHMARK(backward_input<k::conv2d_backward_input>)->Name("conv2d_backward_input/fast")->DenseRange(0, 2);
BENCHMARK(backward_input<k::reference::conv2d_backward_input>)
    ->Name("conv2d_backward_input/reference")
    ->DenseRange(0, 2);
BENCHMARK(backward_weight<k::conv2d_backward_weight>)->Name("conv2d_backward_weight/fast")->DenseRange(0, 2);
BENCHMARK(backward_weight<k::reference::conv2d_backward_weight>)
    ->Name("conv2d_backward_weight/reference")
    ->DenseRange(0, 2);
BENCHMARK(transpose_forward<k::conv_transpose2d_forward>)->Name("conv_transpose2d_forward/fast");
BENCHMARK(transpose_forward<k::reference::conv_transpose2d_forward>)
    ->Name("conv_transpose2d_forward/reference");

BENCHMARK_MAIN();
