// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Convolution kernels on NCHW double buffers.
//
// Two implementations share one geometry type:
//   gi::kernels            im2col + GEMM, OpenMP-parallel over the batch
//   gi::kernels::reference naive serial nested loops, kept as the test oracle
//
// Transposed convolution is expressed through the conv2d adjoint: the forward
// pass of conv_transpose2d is the input-gradient of a conv2d whose input is
// the transposed output. Conv1d is conv2d with height 1.

#pragma once

#include <cstddef>
#include <span>

namespace gi::kernels {

/// Geometry of a 2D convolution: input (n, in_channels, height, width),
/// weights (out_channels, in_channels, kernel_h, kernel_w).
struct Conv2dGeometry {
  int batch = 1;
  int in_channels = 1;
  int height = 1;
  int width = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;

  int out_height() const { return (height + 2 * pad_h - kernel_h) / stride_h + 1; }
  int out_width() const { return (width + 2 * pad_w - kernel_w) / stride_w + 1; }

  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t weight_size() const;

  /// Throws ShapeError when the kernel does not fit the padded input or any
  /// extent is non-positive.
  void validate() const;
  /// validate() plus buffer lengths for input, weight and output.
  void check_buffers(std::size_t in, std::size_t weight, std::size_t out) const;
};

/// Geometry of a transposed convolution: input (n, in_channels, h, w),
/// weights (in_channels, out_channels, kernel_h, kernel_w), output extent
/// (in - 1) * stride - 2 * pad + kernel per axis.
struct ConvTranspose2dGeometry {
  int batch = 1;
  int in_channels = 1;
  int height = 1;
  int width = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;

  int out_height() const { return (height - 1) * stride_h - 2 * pad_h + kernel_h; }
  int out_width() const { return (width - 1) * stride_w - 2 * pad_w + kernel_w; }

  /// The conv2d whose input-gradient is this transposed convolution.
  Conv2dGeometry adjoint() const;
  void validate() const;
};

// Forward writes `out`; backward kernels accumulate (+=) into their outputs.
void conv2d_forward(const Conv2dGeometry& g, std::span<const double> x,
                    std::span<const double> w, std::span<double> out);
void conv2d_backward_input(const Conv2dGeometry& g, std::span<const double> dout,
                           std::span<const double> w, std::span<double> dx);
void conv2d_backward_weight(const Conv2dGeometry& g, std::span<const double> dout,
                            std::span<const double> x, std::span<double> dw);

void conv_transpose2d_forward(const ConvTranspose2dGeometry& g, std::span<const double> x,
                              std::span<const double> w, std::span<double> out);
void conv_transpose2d_backward_input(const ConvTranspose2dGeometry& g,
                                     std::span<const double> dout,
                                     std::span<const double> w, std::span<double> dx);
void conv_transpose2d_backward_weight(const ConvTranspose2dGeometry& g,
                                      std::span<const double> dout,
                                      std::span<const double> x, std::span<double> dw);

namespace reference {

void conv2d_forward(const Conv2dGeometry& g, std::span<const double> x,
                    std::span<const double> w, std::span<double> out);
void conv2d_backward_input(const Conv2dGeometry& g, std::span<const double> dout,
                           std::span<const double> w, std::span<double> dx);
void conv2d_backward_weight(const Conv2dGeometry& g, std::span<const double> dout,
                            std::span<const double> x, std::span<double> dw);

// Direct scatter formulation, independent of the adjoint trick above.
void conv_transpose2d_forward(const ConvTranspose2dGeometry& g, std::span<const double> x,
                              std::span<const double> w, std::span<double> out);

}  // namespace reference

}  // namespace gi::kernels
