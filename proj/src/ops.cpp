// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/ops.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "gi/errors.hpp"
#include "gi/kernels.hpp"

namespace gi::ad {

namespace {

void require_rank(const Var& v, std::size_t rank, const char* op) {
  if (v.shape().size() != rank)
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     to_string(v.shape()));
}

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
}

// (batch, channels, spatial-size) view of a rank >= 3 tensor.
struct Planes {
  int batch;
  int channels;
  std::size_t spatial;
};

Planes planes_of(const Shape& s, const char* op) {
  if (s.size() < 3)
    throw ShapeError(std::string(op) + ": needs spatial axes, got " + to_string(s));
  std::size_t spatial = 1;
  for (std::size_t i = 2; i < s.size(); ++i) spatial *= static_cast<std::size_t>(s[i]);
  return {s[0], s[1], spatial};
}

void add_bias(Tensor& out, const Tensor& bias, int channels) {
  const std::size_t batch = static_cast<std::size_t>(out.dim(0));
  const std::size_t plane = out.size() / (batch * channels);
  auto o = out.data();
  for (std::size_t n = 0; n < batch; ++n)
    for (int c = 0; c < channels; ++c) {
      double* p = o.data() + (n * channels + c) * plane;
      const double b = bias[c];
      for (std::size_t i = 0; i < plane; ++i) p[i] += b;
    }
}

void bias_backward(const Tensor& dout, Tensor& dbias, int channels) {
  const std::size_t batch = static_cast<std::size_t>(dout.dim(0));
  const std::size_t plane = dout.size() / (batch * channels);
  for (std::size_t n = 0; n < batch; ++n)
    for (int c = 0; c < channels; ++c) {
      const double* p = dout.data().data() + (n * channels + c) * plane;
      double acc = 0.0;
      for (std::size_t i = 0; i < plane; ++i) acc += p[i];
      dbias[c] += acc;
    }
}

void check_bias(const std::optional<Var>& bias, int channels, const char* op) {
  if (!bias) return;
  if (bias->shape() != Shape{channels})
    throw ShapeError(std::string(op) + ": bias shape " + to_string(bias->shape()) +
                     " does not match " + std::to_string(channels) + " output channels");
}

Var conv2d_impl(const char* op, Var x, Var weight, std::optional<Var> bias,
                kernels::Conv2dGeometry geo, Shape out_shape) {
  Tensor out(out_shape);
  kernels::conv2d_forward(geo, x.value().data(), weight.value().data(), out.data());
  check_bias(bias, geo.out_channels, op);
  if (bias) add_bias(out, bias->value(), geo.out_channels);

  Graph& g = x.graph();
  const std::size_t xi = x.id(), wi = weight.id();
  const std::optional<std::size_t> bi = bias ? std::optional(bias->id()) : std::nullopt;
  BackwardFn back = [geo, xi, wi, bi](Graph& gr, std::size_t self) {
    const Tensor& dout = gr.grad_buffer(self);
    if (gr.requires_grad(xi))
      kernels::conv2d_backward_input(geo, dout.data(), gr.value(wi).data(),
                                     gr.grad_buffer(xi).data());
    if (gr.requires_grad(wi))
      kernels::conv2d_backward_weight(geo, dout.data(), gr.value(xi).data(),
                                      gr.grad_buffer(wi).data());
    if (bi && gr.requires_grad(*bi)) bias_backward(dout, gr.grad_buffer(*bi), geo.out_channels);
  };
  if (bias) return g.record(op, std::move(out), {x, weight, *bias}, std::move(back));
  return g.record(op, std::move(out), {x, weight}, std::move(back));
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

template <typename Forward, typename Derivative>
Var unary(const char* op, Var x, Forward f, Derivative df) {
  Tensor out(x.shape());
  const auto in = x.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = f(in[i]);
  const std::size_t xi = x.id();
  return x.graph().record(op, std::move(out), {x}, [xi, df](Graph& g, std::size_t self) {
    const auto d = g.grad_buffer(self).data();
    const auto v = g.value(xi).data();
    auto dx = g.grad_buffer(xi).data();
    for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i] * df(v[i]);
  });
}

}  // namespace

Var conv2d(Var x, Var weight, std::optional<Var> bias, Window stride, Window padding) {
  require_rank(x, 4, "conv2d");
  require_rank(weight, 4, "conv2d");
  if (weight.shape()[1] != x.shape()[1])
    throw ShapeError("conv2d: weight expects " + std::to_string(weight.shape()[1]) +
                     " input channels, input has " + std::to_string(x.shape()[1]));
  kernels::Conv2dGeometry geo{x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3],
                              weight.shape()[0], weight.shape()[2], weight.shape()[3],
                              stride.h, stride.w, padding.h, padding.w};
  geo.validate();
  return conv2d_impl("conv2d", x, weight, bias, geo,
                     {geo.batch, geo.out_channels, geo.out_height(), geo.out_width()});
}

Var conv1d(Var x, Var weight, std::optional<Var> bias, int stride, int padding) {
  require_rank(x, 3, "conv1d");
  require_rank(weight, 3, "conv1d");
  if (weight.shape()[1] != x.shape()[1])
    throw ShapeError("conv1d: weight expects " + std::to_string(weight.shape()[1]) +
                     " input channels, input has " + std::to_string(x.shape()[1]));
  kernels::Conv2dGeometry geo{x.shape()[0], x.shape()[1], 1, x.shape()[2], weight.shape()[0],
                              1, weight.shape()[2], 1, stride, 0, padding};
  geo.validate();
  return conv2d_impl("conv1d", x, weight, bias, geo,
                     {geo.batch, geo.out_channels, geo.out_width()});
}

Var conv_transpose2d(Var x, Var weight, std::optional<Var> bias, Window stride,
                     Window padding) {
  require_rank(x, 4, "conv_transpose2d");
  require_rank(weight, 4, "conv_transpose2d");
  if (weight.shape()[0] != x.shape()[1])
    throw ShapeError("conv_transpose2d: weight expects " + std::to_string(weight.shape()[0]) +
                     " input channels, input has " + std::to_string(x.shape()[1]));
  kernels::ConvTranspose2dGeometry geo{x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3],
                                       weight.shape()[1], weight.shape()[2], weight.shape()[3],
                                       stride.h, stride.w, padding.h, padding.w};
  geo.validate();
  check_bias(bias, geo.out_channels, "conv_transpose2d");
  Tensor out({geo.batch, geo.out_channels, geo.out_height(), geo.out_width()});
  kernels::conv_transpose2d_forward(geo, x.value().data(), weight.value().data(), out.data());
  if (bias) add_bias(out, bias->value(), geo.out_channels);

  const std::size_t xi = x.id(), wi = weight.id();
  const std::optional<std::size_t> bi = bias ? std::optional(bias->id()) : std::nullopt;
  BackwardFn back = [geo, xi, wi, bi](Graph& gr, std::size_t self) {
    const Tensor& dout = gr.grad_buffer(self);
    if (gr.requires_grad(xi))
      kernels::conv_transpose2d_backward_input(geo, dout.data(), gr.value(wi).data(),
                                               gr.grad_buffer(xi).data());
    if (gr.requires_grad(wi))
      kernels::conv_transpose2d_backward_weight(geo, dout.data(), gr.value(xi).data(),
                                                gr.grad_buffer(wi).data());
    if (bi && gr.requires_grad(*bi)) bias_backward(dout, gr.grad_buffer(*bi), geo.out_channels);
  };
  Graph& g = x.graph();
  if (bias) return g.record("conv_transpose2d", std::move(out), {x, weight, *bias}, back);
  return g.record("conv_transpose2d", std::move(out), {x, weight}, back);
}

Var glu(Var x) {
  const Planes p = planes_of(x.shape(), "glu");
  if (p.channels % 2 != 0)
    throw ShapeError("glu: channel count " + std::to_string(p.channels) + " is odd");
  const int half = p.channels / 2;
  Shape out_shape = x.shape();
  out_shape[1] = half;
  Tensor out(out_shape);
  const double* in = x.value().data().data();
  double* o = out.data().data();
  const std::size_t block = static_cast<std::size_t>(half) * p.spatial;
  for (int n = 0; n < p.batch; ++n) {
    const double* a = in + static_cast<std::size_t>(n) * 2 * block;
    const double* b = a + block;
    double* y = o + static_cast<std::size_t>(n) * block;
    for (std::size_t i = 0; i < block; ++i) y[i] = a[i] * sigmoid(b[i]);
  }
  const std::size_t xi = x.id();
  return x.graph().record("glu", std::move(out), {x}, [xi, p, block](Graph& g, std::size_t self) {
    const double* d = g.grad_buffer(self).data().data();
    const double* in = g.value(xi).data().data();
    double* dx = g.grad_buffer(xi).data().data();
    for (int n = 0; n < p.batch; ++n) {
      const std::size_t base = static_cast<std::size_t>(n) * 2 * block;
      const double* a = in + base;
      const double* b = a + block;
      double* da = dx + base;
      double* db = da + block;
      const double* dy = d + static_cast<std::size_t>(n) * block;
      for (std::size_t i = 0; i < block; ++i) {
        const double s = sigmoid(b[i]);
        da[i] += dy[i] * s;
        db[i] += dy[i] * a[i] * s * (1.0 - s);
      }
    }
  });
}

Var standardize(Var x, double eps) {
  const Planes p = planes_of(x.shape(), "standardize");
  const std::size_t groups = static_cast<std::size_t>(p.batch) * p.channels;
  const std::size_t m = p.spatial;
  Tensor out(x.shape());
  std::vector<double> sigma(groups);
  const double* in = x.value().data().data();
  double* o = out.data().data();
#pragma omp parallel for schedule(static) if (groups * m > 32768)
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const double* v = in + gi * m;
    double mu = 0.0;
    for (std::size_t i = 0; i < m; ++i) mu += v[i];
    mu /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 0; i < m; ++i) var += (v[i] - mu) * (v[i] - mu);
    var /= static_cast<double>(m);
    sigma[gi] = std::sqrt(var);
    const double s = sigma[gi] + eps;
    double* y = o + gi * m;
    for (std::size_t i = 0; i < m; ++i) y[i] = (v[i] - mu) / s;
  }
  const std::size_t xi = x.id();
  return x.graph().record(
      "standardize", std::move(out), {x},
      [xi, groups, m, eps, sigma = std::move(sigma)](Graph& g, std::size_t self) {
        const double* d = g.grad_buffer(self).data().data();
        const double* y = g.value(self).data().data();
        double* dx = g.grad_buffer(xi).data().data();
        const double inv_m = 1.0 / static_cast<double>(m);
#pragma omp parallel for schedule(static) if (groups * m > 32768)
        for (std::size_t gi = 0; gi < groups; ++gi) {
          const double s = sigma[gi] + eps;
          const double* dy = d + gi * m;
          const double* yy = y + gi * m;
          // y = (x - mu) / s, so (x - mu) = y * s.
          double mean_d = 0.0, dot = 0.0;
          for (std::size_t i = 0; i < m; ++i) {
            mean_d += dy[i];
            dot += dy[i] * yy[i];
          }
          mean_d *= inv_m;
          // d_j * sum(g_i d_i) / (M sigma s^2) rewritten with y = d / s.
          const double coupling = sigma[gi] > 0.0 ? dot * s * inv_m / sigma[gi] : 0.0;
          double* out_dx = dx + gi * m;
          for (std::size_t i = 0; i < m; ++i)
            out_dx[i] += (dy[i] - mean_d - yy[i] * coupling) / s;
        }
      });
}

Var channel_affine(Var x, Var gamma, Var beta) {
  const Planes p = planes_of(x.shape(), "channel_affine");
  if (gamma.shape() != Shape{p.channels} || beta.shape() != Shape{p.channels})
    throw ShapeError("channel_affine: gamma/beta must have shape (" +
                     std::to_string(p.channels) + ")");
  Tensor out(x.shape());
  const double* in = x.value().data().data();
  const Tensor& gm = gamma.value();
  const Tensor& bt = beta.value();
  double* o = out.data().data();
  for (int n = 0; n < p.batch; ++n)
    for (int c = 0; c < p.channels; ++c) {
      const std::size_t off = (static_cast<std::size_t>(n) * p.channels + c) * p.spatial;
      for (std::size_t i = 0; i < p.spatial; ++i) o[off + i] = gm[c] * in[off + i] + bt[c];
    }
  const std::size_t xi = x.id(), gi = gamma.id(), bi = beta.id();
  return x.graph().record(
      "channel_affine", std::move(out), {x, gamma, beta}, [xi, gi, bi, p](Graph& g, std::size_t self) {
        const double* d = g.grad_buffer(self).data().data();
        const double* in = g.value(xi).data().data();
        const Tensor& gm = g.value(gi);
        const bool need_x = g.requires_grad(xi), need_g = g.requires_grad(gi),
                   need_b = g.requires_grad(bi);
        for (int n = 0; n < p.batch; ++n)
          for (int c = 0; c < p.channels; ++c) {
            const std::size_t off = (static_cast<std::size_t>(n) * p.channels + c) * p.spatial;
            double sg = 0.0, sb = 0.0;
            for (std::size_t i = 0; i < p.spatial; ++i) {
              sg += d[off + i] * in[off + i];
              sb += d[off + i];
            }
            if (need_x) {
              double* dx = g.grad_buffer(xi).data().data() + off;
              for (std::size_t i = 0; i < p.spatial; ++i) dx[i] += gm[c] * d[off + i];
            }
            if (need_g) g.grad_buffer(gi)[c] += sg;
            if (need_b) g.grad_buffer(bi)[c] += sb;
          }
      });
}

Var coded_affine(Var x, Var gamma_table, Var beta_table, std::span<const int> codes) {
  const Planes p = planes_of(x.shape(), "coded_affine");
  require_rank(gamma_table, 2, "coded_affine");
  require_same(gamma_table, beta_table, "coded_affine");
  const int n_codes = gamma_table.shape()[0];
  if (gamma_table.shape()[1] != p.channels)
    throw ShapeError("coded_affine: table width " + std::to_string(gamma_table.shape()[1]) +
                     " vs " + std::to_string(p.channels) + " channels");
  if (codes.size() != static_cast<std::size_t>(p.batch))
    throw ShapeError("coded_affine: " + std::to_string(codes.size()) + " codes for batch of " +
                     std::to_string(p.batch));
  for (int code : codes)
    if (code < 0 || code >= n_codes)
      throw UnknownDomain("code " + std::to_string(code) + " outside [0, " +
                          std::to_string(n_codes) + ")");
  std::vector<int> rows(codes.begin(), codes.end());
  Tensor out(x.shape());
  const double* in = x.value().data().data();
  const Tensor& gm = gamma_table.value();
  const Tensor& bt = beta_table.value();
  double* o = out.data().data();
  for (int n = 0; n < p.batch; ++n)
    for (int c = 0; c < p.channels; ++c) {
      const std::size_t off = (static_cast<std::size_t>(n) * p.channels + c) * p.spatial;
      const std::size_t t = static_cast<std::size_t>(rows[n]) * p.channels + c;
      for (std::size_t i = 0; i < p.spatial; ++i) o[off + i] = gm[t] * in[off + i] + bt[t];
    }
  const std::size_t xi = x.id(), gi = gamma_table.id(), bi = beta_table.id();
  return x.graph().record(
      "coded_affine", std::move(out), {x, gamma_table, beta_table},
      [xi, gi, bi, p, rows = std::move(rows)](Graph& g, std::size_t self) {
        const double* d = g.grad_buffer(self).data().data();
        const double* in = g.value(xi).data().data();
        const Tensor& gm = g.value(gi);
        const bool need_x = g.requires_grad(xi), need_g = g.requires_grad(gi),
                   need_b = g.requires_grad(bi);
        for (int n = 0; n < p.batch; ++n)
          for (int c = 0; c < p.channels; ++c) {
            const std::size_t off = (static_cast<std::size_t>(n) * p.channels + c) * p.spatial;
            const std::size_t t = static_cast<std::size_t>(rows[n]) * p.channels + c;
            double sg = 0.0, sb = 0.0;
            for (std::size_t i = 0; i < p.spatial; ++i) {
              sg += d[off + i] * in[off + i];
              sb += d[off + i];
            }
            if (need_x) {
              double* dx = g.grad_buffer(xi).data().data() + off;
              for (std::size_t i = 0; i < p.spatial; ++i) dx[i] += gm[t] * d[off + i];
            }
            if (need_g) g.grad_buffer(gi)[t] += sg;
            if (need_b) g.grad_buffer(bi)[t] += sb;
          }
      });
}

Var instance_norm(Var x, Var gamma, Var beta, double eps) {
  return channel_affine(standardize(x, eps), gamma, beta);
}

Var cond_instance_norm(Var x, std::span<const int> codes, Var gamma_table, Var beta_table,
                       double eps) {
  return coded_affine(standardize(x, eps), gamma_table, beta_table, codes);
}

Var global_sum_pool(Var x) {
  const Planes p = planes_of(x.shape(), "global_sum_pool");
  Tensor out({p.batch, p.channels});
  const double* in = x.value().data().data();
  for (std::size_t gi = 0; gi < out.size(); ++gi) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.spatial; ++i) acc += in[gi * p.spatial + i];
    out[gi] = acc;
  }
  const std::size_t xi = x.id();
  return x.graph().record("global_sum_pool", std::move(out), {x}, [xi, p](Graph& g, std::size_t self) {
    const Tensor& d = g.grad_buffer(self);
    double* dx = g.grad_buffer(xi).data().data();
    for (std::size_t gi = 0; gi < d.size(); ++gi)
      for (std::size_t i = 0; i < p.spatial; ++i) dx[gi * p.spatial + i] += d[gi];
  });
}

Var fully_connected(Var x, Var weight, Var bias) {
  require_rank(x, 2, "fully_connected");
  require_rank(weight, 2, "fully_connected");
  const int batch = x.shape()[0], in_f = x.shape()[1], out_f = weight.shape()[0];
  if (weight.shape()[1] != in_f)
    throw ShapeError("fully_connected: weight " + to_string(weight.shape()) + " vs input " +
                     to_string(x.shape()));
  if (bias.shape() != Shape{out_f})
    throw ShapeError("fully_connected: bias shape " + to_string(bias.shape()));
  Tensor out({batch, out_f});
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  for (int n = 0; n < batch; ++n)
    for (int o = 0; o < out_f; ++o) {
      double acc = bias.value()[o];
      for (int f = 0; f < in_f; ++f) acc += wv[o * in_f + f] * xv[n * in_f + f];
      out[n * out_f + o] = acc;
    }
  const std::size_t xi = x.id(), wi = weight.id(), bi = bias.id();
  return x.graph().record(
      "fully_connected", std::move(out), {x, weight, bias},
      [xi, wi, bi, batch, in_f, out_f](Graph& g, std::size_t self) {
        const Tensor& d = g.grad_buffer(self);
        const Tensor& xv = g.value(xi);
        const Tensor& wv = g.value(wi);
        const bool need_x = g.requires_grad(xi), need_w = g.requires_grad(wi),
                   need_b = g.requires_grad(bi);
        for (int n = 0; n < batch; ++n)
          for (int o = 0; o < out_f; ++o) {
            const double dv = d[n * out_f + o];
            if (need_b) g.grad_buffer(bi)[o] += dv;
            for (int f = 0; f < in_f; ++f) {
              if (need_x) g.grad_buffer(xi)[n * in_f + f] += dv * wv[o * in_f + f];
              if (need_w) g.grad_buffer(wi)[o * in_f + f] += dv * xv[n * in_f + f];
            }
          }
      });
}

Var pair_projection(Var features, Var table, std::span<const int> rows) {
  require_rank(features, 2, "pair_projection");
  require_rank(table, 2, "pair_projection");
  const int batch = features.shape()[0], width = features.shape()[1];
  const int n_rows = table.shape()[0];
  if (table.shape()[1] != width)
    throw ShapeError("pair_projection: table " + to_string(table.shape()) + " vs features " +
                     to_string(features.shape()));
  if (rows.size() != static_cast<std::size_t>(batch))
    throw ShapeError("pair_projection: row count does not match batch");
  for (int r : rows)
    if (r < 0 || r >= n_rows)
      throw UnknownDomain("projection row " + std::to_string(r) + " outside [0, " +
                          std::to_string(n_rows) + ")");
  std::vector<int> idx(rows.begin(), rows.end());
  Tensor out({batch, 1});
  const Tensor& h = features.value();
  const Tensor& t = table.value();
  for (int n = 0; n < batch; ++n) {
    double acc = 0.0;
    for (int f = 0; f < width; ++f) acc += h[n * width + f] * t[idx[n] * width + f];
    out[n] = acc;
  }
  const std::size_t hi = features.id(), ti = table.id();
  return features.graph().record(
      "pair_projection", std::move(out), {features, table},
      [hi, ti, batch, width, idx = std::move(idx)](Graph& g, std::size_t self) {
        const Tensor& d = g.grad_buffer(self);
        const Tensor& h = g.value(hi);
        const Tensor& t = g.value(ti);
        const bool need_h = g.requires_grad(hi), need_t = g.requires_grad(ti);
        for (int n = 0; n < batch; ++n)
          for (int f = 0; f < width; ++f) {
            if (need_h) g.grad_buffer(hi)[n * width + f] += d[n] * t[idx[n] * width + f];
            if (need_t) g.grad_buffer(ti)[idx[n] * width + f] += d[n] * h[n * width + f];
          }
      });
}

namespace {

// Reshapes share the NCHW memory order, so value and gradient are copied
// through unchanged.
Var relabel(const char* op, Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  const std::size_t xi = x.id();
  return x.graph().record(op, std::move(out), {x}, [xi](Graph& g, std::size_t self) {
    const auto d = g.grad_buffer(self).data();
    auto dx = g.grad_buffer(xi).data();
    for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i];
  });
}

}  // namespace

Var reshape_2d_to_1d(Var x) {
  require_rank(x, 4, "reshape_2d_to_1d");
  const Shape& s = x.shape();
  return relabel("reshape_2d_to_1d", x, {s[0], s[1] * s[2], s[3]});
}

Var reshape_1d_to_2d(Var x, int height) {
  require_rank(x, 3, "reshape_1d_to_2d");
  const Shape& s = x.shape();
  if (height < 1 || s[1] % height != 0)
    throw ShapeError("reshape_1d_to_2d: height " + std::to_string(height) +
                     " does not divide " + std::to_string(s[1]) + " channels");
  return relabel("reshape_1d_to_2d", x, {s[0], s[1] / height, height, s[2]});
}

Var add(Var a, Var b) {
  require_same(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.graph().record("add", std::move(out), {a, b}, [ai, bi](Graph& g, std::size_t self) {
    const Tensor& d = g.grad_buffer(self);
    for (std::size_t id : {ai, bi})
      if (g.requires_grad(id)) {
        auto dx = g.grad_buffer(id).data();
        for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i];
      }
  });
}

Var sub(Var a, Var b) {
  require_same(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.graph().record("sub", std::move(out), {a, b}, [ai, bi](Graph& g, std::size_t self) {
    const Tensor& d = g.grad_buffer(self);
    if (g.requires_grad(ai)) {
      auto dx = g.grad_buffer(ai).data();
      for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i];
    }
    if (g.requires_grad(bi)) {
      auto dx = g.grad_buffer(bi).data();
      for (std::size_t i = 0; i < d.size(); ++i) dx[i] -= d[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.graph().record("mul", std::move(out), {a, b}, [ai, bi](Graph& g, std::size_t self) {
    const Tensor& d = g.grad_buffer(self);
    if (g.requires_grad(ai)) {
      const Tensor& bv = g.value(bi);
      auto dx = g.grad_buffer(ai).data();
      for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i] * bv[i];
    }
    if (g.requires_grad(bi)) {
      const Tensor& av = g.value(ai);
      auto dx = g.grad_buffer(bi).data();
      for (std::size_t i = 0; i < d.size(); ++i) dx[i] += d[i] * av[i];
    }
  });
}

Var scale(Var x, double s) {
  return unary("scale", x, [s](double v) { return s * v; }, [s](double) { return s; });
}

Var add_scalar(Var x, double s) {
  return unary("add_scalar", x, [s](double v) { return v + s; }, [](double) { return 1.0; });
}

Var abs(Var x) {
  return unary(
      "abs", x, [](double v) { return std::fabs(v); },
      [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var square(Var x) {
  return unary("square", x, [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
}

Var softplus(Var x) {
  return unary(
      "softplus", x,
      [](double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
      [](double v) { return sigmoid(v); });
}

Var sum(Var x) {
  double acc = 0.0;
  for (double v : x.value().data()) acc += v;
  const std::size_t xi = x.id();
  return x.graph().record("sum", Tensor({1}, {acc}), {x}, [xi](Graph& g, std::size_t self) {
    const double d = g.grad_buffer(self)[0];
    for (double& v : g.grad_buffer(xi).data()) v += d;
  });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  if (n == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(x), 1.0 / n);
}

Var detach(Var x) { return x.graph().constant(x.value()); }

}  // namespace gi::ad
