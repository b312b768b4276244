// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <string>
#include <vector>

#include "gi/errors.hpp"

namespace gi::kernels {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

std::string describe(const Conv2dGeometry& g) {
  return "input " + std::to_string(g.height) + "x" + std::to_string(g.width) + ", kernel " +
         std::to_string(g.kernel_h) + "x" + std::to_string(g.kernel_w) + ", stride " +
         std::to_string(g.stride_h) + "x" + std::to_string(g.stride_w) + ", pad " +
         std::to_string(g.pad_h) + "x" + std::to_string(g.pad_w);
}

// Unfold one sample (in_channels, h, w) into a row-major
// (in_channels * kh * kw) x (oh * ow) patch matrix.
void im2col(const Conv2dGeometry& g, const double* x, double* col) {
  const int oh_n = g.out_height();
  const int ow_n = g.out_width();
  const std::size_t plane = static_cast<std::size_t>(oh_n) * ow_n;
  for (int ic = 0; ic < g.in_channels; ++ic) {
    const double* xc = x + static_cast<std::size_t>(ic) * g.height * g.width;
    for (int kh = 0; kh < g.kernel_h; ++kh) {
      for (int kw = 0; kw < g.kernel_w; ++kw) {
        double* row = col + ((static_cast<std::size_t>(ic) * g.kernel_h + kh) * g.kernel_w + kw) * plane;
        for (int oh = 0; oh < oh_n; ++oh) {
          const int ih = oh * g.stride_h - g.pad_h + kh;
          double* dst = row + static_cast<std::size_t>(oh) * ow_n;
          if (ih < 0 || ih >= g.height) {
            std::fill(dst, dst + ow_n, 0.0);
            continue;
          }
          const double* src = xc + static_cast<std::size_t>(ih) * g.width;
          for (int ow = 0; ow < ow_n; ++ow) {
            const int iw = ow * g.stride_w - g.pad_w + kw;
            dst[ow] = (iw >= 0 && iw < g.width) ? src[iw] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add the patch matrix back onto one sample.
void col2im(const Conv2dGeometry& g, const double* col, double* dx) {
  const int oh_n = g.out_height();
  const int ow_n = g.out_width();
  const std::size_t plane = static_cast<std::size_t>(oh_n) * ow_n;
  for (int ic = 0; ic < g.in_channels; ++ic) {
    double* xc = dx + static_cast<std::size_t>(ic) * g.height * g.width;
    for (int kh = 0; kh < g.kernel_h; ++kh) {
      for (int kw = 0; kw < g.kernel_w; ++kw) {
        const double* row =
            col + ((static_cast<std::size_t>(ic) * g.kernel_h + kh) * g.kernel_w + kw) * plane;
        for (int oh = 0; oh < oh_n; ++oh) {
          const int ih = oh * g.stride_h - g.pad_h + kh;
          if (ih < 0 || ih >= g.height) continue;
          const double* src = row + static_cast<std::size_t>(oh) * ow_n;
          double* dst = xc + static_cast<std::size_t>(ih) * g.width;
          for (int ow = 0; ow < ow_n; ++ow) {
            const int iw = ow * g.stride_w - g.pad_w + kw;
            if (iw >= 0 && iw < g.width) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

std::size_t patch_rows(const Conv2dGeometry& g) {
  return static_cast<std::size_t>(g.in_channels) * g.kernel_h * g.kernel_w;
}

std::size_t patch_cols(const Conv2dGeometry& g) {
  return static_cast<std::size_t>(g.out_height()) * g.out_width();
}

}  // namespace

std::size_t Conv2dGeometry::input_size() const {
  return static_cast<std::size_t>(batch) * in_channels * height * width;
}

std::size_t Conv2dGeometry::output_size() const {
  return static_cast<std::size_t>(batch) * out_channels * out_height() * out_width();
}

std::size_t Conv2dGeometry::weight_size() const {
  return static_cast<std::size_t>(out_channels) * in_channels * kernel_h * kernel_w;
}

void Conv2dGeometry::validate() const {
  if (batch < 1 || in_channels < 1 || out_channels < 1 || height < 1 || width < 1 ||
      kernel_h < 1 || kernel_w < 1 || stride_h < 1 || stride_w < 1 || pad_h < 0 || pad_w < 0)
    throw ShapeError("non-positive convolution extent (" + describe(*this) + ")");
  if (height + 2 * pad_h < kernel_h || width + 2 * pad_w < kernel_w)
    throw ShapeError("kernel larger than padded input (" + describe(*this) + ")");
}

void Conv2dGeometry::check_buffers(std::size_t in, std::size_t weight, std::size_t out) const {
  validate();
  if (in != input_size() || weight != weight_size() || out != output_size())
    throw ShapeError("buffer sizes do not match convolution geometry (" + describe(*this) + ")");
}

Conv2dGeometry ConvTranspose2dGeometry::adjoint() const {
  Conv2dGeometry g;
  g.batch = batch;
  g.in_channels = out_channels;
  g.height = out_height();
  g.width = out_width();
  g.out_channels = in_channels;
  g.kernel_h = kernel_h;
  g.kernel_w = kernel_w;
  g.stride_h = stride_h;
  g.stride_w = stride_w;
  g.pad_h = pad_h;
  g.pad_w = pad_w;
  return g;
}

void ConvTranspose2dGeometry::validate() const {
  if (batch < 1 || in_channels < 1 || out_channels < 1 || height < 1 || width < 1 ||
      kernel_h < 1 || kernel_w < 1 || stride_h < 1 || stride_w < 1 || pad_h < 0 || pad_w < 0)
    throw ShapeError("non-positive transposed-convolution extent");
  if (out_height() < 1 || out_width() < 1)
    throw ShapeError("transposed convolution produces an empty output");
  const Conv2dGeometry a = adjoint();
  a.validate();
  if (a.out_height() != height || a.out_width() != width)
    throw ShapeError("transposed-convolution geometry has no exact conv2d adjoint");
}

void conv2d_forward(const Conv2dGeometry& g, std::span<const double> x,
                    std::span<const double> w, std::span<double> out) {
  g.check_buffers(x.size(), w.size(), out.size());
  const std::size_t rows = patch_rows(g);
  const std::size_t cols = patch_cols(g);
  const std::size_t in_stride = static_cast<std::size_t>(g.in_channels) * g.height * g.width;
  const std::size_t out_stride = static_cast<std::size_t>(g.out_channels) * cols;
  const ConstMap weights(w.data(), g.out_channels, static_cast<Eigen::Index>(rows));

#pragma omp parallel
  {
    std::vector<double> col(rows * cols);
#pragma omp for schedule(static)
    for (int n = 0; n < g.batch; ++n) {
      im2col(g, x.data() + n * in_stride, col.data());
      Map y(out.data() + n * out_stride, g.out_channels, static_cast<Eigen::Index>(cols));
      y.noalias() = weights * ConstMap(col.data(), static_cast<Eigen::Index>(rows),
                                       static_cast<Eigen::Index>(cols));
    }
  }
}

void conv2d_backward_input(const Conv2dGeometry& g, std::span<const double> dout,
                           std::span<const double> w, std::span<double> dx) {
  g.check_buffers(dx.size(), w.size(), dout.size());
  const std::size_t rows = patch_rows(g);
  const std::size_t cols = patch_cols(g);
  const std::size_t in_stride = static_cast<std::size_t>(g.in_channels) * g.height * g.width;
  const std::size_t out_stride = static_cast<std::size_t>(g.out_channels) * cols;
  const ConstMap weights(w.data(), g.out_channels, static_cast<Eigen::Index>(rows));

#pragma omp parallel
  {
    std::vector<double> col(rows * cols);
#pragma omp for schedule(static)
    for (int n = 0; n < g.batch; ++n) {
      Map c(col.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      c.noalias() = weights.transpose() *
                    ConstMap(dout.data() + n * out_stride, g.out_channels,
                             static_cast<Eigen::Index>(cols));
      col2im(g, col.data(), dx.data() + n * in_stride);
    }
  }
}

void conv2d_backward_weight(const Conv2dGeometry& g, std::span<const double> dout,
                            std::span<const double> x, std::span<double> dw) {
  g.check_buffers(x.size(), dw.size(), dout.size());
  const std::size_t rows = patch_rows(g);
  const std::size_t cols = patch_cols(g);
  const std::size_t in_stride = static_cast<std::size_t>(g.in_channels) * g.height * g.width;
  const std::size_t out_stride = static_cast<std::size_t>(g.out_channels) * cols;
  const std::size_t wsize = g.weight_size();

  // Per-sample partials summed in batch order keep the result independent of
  // the thread count.
  std::vector<double> partial(wsize * g.batch);
#pragma omp parallel
  {
    std::vector<double> col(rows * cols);
#pragma omp for schedule(static)
    for (int n = 0; n < g.batch; ++n) {
      im2col(g, x.data() + n * in_stride, col.data());
      Map p(partial.data() + n * wsize, g.out_channels, static_cast<Eigen::Index>(rows));
      p.noalias() = ConstMap(dout.data() + n * out_stride, g.out_channels,
                             static_cast<Eigen::Index>(cols)) *
                    ConstMap(col.data(), static_cast<Eigen::Index>(rows),
                             static_cast<Eigen::Index>(cols))
                        .transpose();
    }
  }
  for (int n = 0; n < g.batch; ++n) {
    const double* p = partial.data() + n * wsize;
    for (std::size_t i = 0; i < wsize; ++i) dw[i] += p[i];
  }
}

void conv_transpose2d_forward(const ConvTranspose2dGeometry& g, std::span<const double> x,
                              std::span<const double> w, std::span<double> out) {
  g.validate();
  g.adjoint().check_buffers(out.size(), w.size(), x.size());
  std::fill(out.begin(), out.end(), 0.0);
  conv2d_backward_input(g.adjoint(), x, w, out);
}

void conv_transpose2d_backward_input(const ConvTranspose2dGeometry& g,
                                     std::span<const double> dout,
                                     std::span<const double> w, std::span<double> dx) {
  g.validate();
  g.adjoint().check_buffers(dout.size(), w.size(), dx.size());
  const Conv2dGeometry a = g.adjoint();
  std::vector<double> tmp(a.output_size());
  conv2d_forward(a, dout, w, tmp);
  for (std::size_t i = 0; i < tmp.size(); ++i) dx[i] += tmp[i];
}

void conv_transpose2d_backward_weight(const ConvTranspose2dGeometry& g,
                                      std::span<const double> dout,
                                      std::span<const double> x, std::span<double> dw) {
  g.validate();
  g.adjoint().check_buffers(dout.size(), dw.size(), x.size());
  conv2d_backward_weight(g.adjoint(), x, dout, dw);
}

}  // namespace gi::kernels
