// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "gi/kernels.hpp"

namespace gi::kernels::reference {

namespace {

inline std::size_t at4(int c_extent, int h_extent, int w_extent, int n, int c, int h, int w) {
  return ((static_cast<std::size_t>(n) * c_extent + c) * h_extent + h) * w_extent + w;
}

}  // namespace

void conv2d_forward(const Conv2dGeometry& g, std::span<const double> x,
                    std::span<const double> w, std::span<double> out) {
  g.check_buffers(x.size(), w.size(), out.size());
  const int oh_n = g.out_height();
  const int ow_n = g.out_width();
  for (int n = 0; n < g.batch; ++n)
    for (int oc = 0; oc < g.out_channels; ++oc)
      for (int oh = 0; oh < oh_n; ++oh)
        for (int ow = 0; ow < ow_n; ++ow) {
          double acc = 0.0;
          for (int ic = 0; ic < g.in_channels; ++ic)
            for (int kh = 0; kh < g.kernel_h; ++kh)
              for (int kw = 0; kw < g.kernel_w; ++kw) {
                const int ih = oh * g.stride_h - g.pad_h + kh;
                const int iw = ow * g.stride_w - g.pad_w + kw;
                if (ih < 0 || ih >= g.height || iw < 0 || iw >= g.width) continue;
                acc += x[at4(g.in_channels, g.height, g.width, n, ic, ih, iw)] *
                       w[at4(g.in_channels, g.kernel_h, g.kernel_w, oc, ic, kh, kw)];
              }
          out[at4(g.out_channels, oh_n, ow_n, n, oc, oh, ow)] = acc;
        }
}

void conv2d_backward_input(const Conv2dGeometry& g, std::span<const double> dout,
                           std::span<const double> w, std::span<double> dx) {
  g.check_buffers(dx.size(), w.size(), dout.size());
  const int oh_n = g.out_height();
  const int ow_n = g.out_width();
  for (int n = 0; n < g.batch; ++n)
    for (int oc = 0; oc < g.out_channels; ++oc)
      for (int oh = 0; oh < oh_n; ++oh)
        for (int ow = 0; ow < ow_n; ++ow) {
          const double d = dout[at4(g.out_channels, oh_n, ow_n, n, oc, oh, ow)];
          for (int ic = 0; ic < g.in_channels; ++ic)
            for (int kh = 0; kh < g.kernel_h; ++kh)
              for (int kw = 0; kw < g.kernel_w; ++kw) {
                const int ih = oh * g.stride_h - g.pad_h + kh;
                const int iw = ow * g.stride_w - g.pad_w + kw;
                if (ih < 0 || ih >= g.height || iw < 0 || iw >= g.width) continue;
                dx[at4(g.in_channels, g.height, g.width, n, ic, ih, iw)] +=
                    d * w[at4(g.in_channels, g.kernel_h, g.kernel_w, oc, ic, kh, kw)];
              }
        }
}

void conv2d_backward_weight(const Conv2dGeometry& g, std::span<const double> dout,
                            std::span<const double> x, std::span<double> dw) {
  g.check_buffers(x.size(), dw.size(), dout.size());
  const int oh_n = g.out_height();
  const int ow_n = g.out_width();
  for (int n = 0; n < g.batch; ++n)
    for (int oc = 0; oc < g.out_channels; ++oc)
      for (int oh = 0; oh < oh_n; ++oh)
        for (int ow = 0; ow < ow_n; ++ow) {
          const double d = dout[at4(g.out_channels, oh_n, ow_n, n, oc, oh, ow)];
          for (int ic = 0; ic < g.in_channels; ++ic)
            for (int kh = 0; kh < g.kernel_h; ++kh)
              for (int kw = 0; kw < g.kernel_w; ++kw) {
                const int ih = oh * g.stride_h - g.pad_h + kh;
                const int iw = ow * g.stride_w - g.pad_w + kw;
                if (ih < 0 || ih >= g.height || iw < 0 || iw >= g.width) continue;
                dw[at4(g.in_channels, g.kernel_h, g.kernel_w, oc, ic, kh, kw)] +=
                    d * x[at4(g.in_channels, g.height, g.width, n, ic, ih, iw)];
              }
        }
}

void conv_transpose2d_forward(const ConvTranspose2dGeometry& g, std::span<const double> x,
                              std::span<const double> w, std::span<double> out) {
  g.validate();
  g.adjoint().check_buffers(out.size(), w.size(), x.size());
  const int oh_n = g.out_height();
  const int ow_n = g.out_width();
  std::fill(out.begin(), out.end(), 0.0);
  for (int n = 0; n < g.batch; ++n)
    for (int ic = 0; ic < g.in_channels; ++ic)
      for (int ih = 0; ih < g.height; ++ih)
        for (int iw = 0; iw < g.width; ++iw) {
          const double v = x[at4(g.in_channels, g.height, g.width, n, ic, ih, iw)];
          for (int oc = 0; oc < g.out_channels; ++oc)
            for (int kh = 0; kh < g.kernel_h; ++kh)
              for (int kw = 0; kw < g.kernel_w; ++kw) {
                const int oh = ih * g.stride_h - g.pad_h + kh;
                const int ow = iw * g.stride_w - g.pad_w + kw;
                if (oh < 0 || oh >= oh_n || ow < 0 || ow >= ow_n) continue;
                out[at4(g.out_channels, oh_n, ow_n, n, oc, oh, ow)] +=
                    v * w[at4(g.out_channels, g.kernel_h, g.kernel_w, ic, oc, kh, kw)];
              }
        }
}

}  // namespace gi::kernels::reference
