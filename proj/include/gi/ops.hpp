// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable primitives used by the generator and discriminator. Layouts
// are NCHW for 2D feature maps and NCW for 1D ones; all ops are
// shape-checked and throw ShapeError on mismatch.

#pragma once

#include <optional>
#include <span>

#include "gi/graph.hpp"

namespace gi::ad {

/// Guard added to the standard deviation in every normalisation.
inline constexpr double kNormEpsilon = 1e-5;

/// Stride or padding along (height, width).
struct Window {
  int h = 1;
  int w = 1;
};

/// x (N, Ci, H, W), weight (Co, Ci, kh, kw), optional bias (Co); zero padding.
Var conv2d(Var x, Var weight, std::optional<Var> bias, Window stride, Window padding);
/// x (N, Ci, W), weight (Co, Ci, k), optional bias (Co).
Var conv1d(Var x, Var weight, std::optional<Var> bias, int stride, int padding);
/// x (N, Ci, H, W), weight (Ci, Co, kh, kw); output extent (in-1)*s - 2p + k.
Var conv_transpose2d(Var x, Var weight, std::optional<Var> bias, Window stride,
                     Window padding);

/// Splits channels into halves a, b and returns a * sigmoid(b).
Var glu(Var x);

/// (x - mean) / (std + eps) per sample and channel over the spatial axes.
Var standardize(Var x, double eps = kNormEpsilon);
/// gamma[c] * x + beta[c]; gamma and beta have shape (C).
Var channel_affine(Var x, Var gamma, Var beta);
/// Per-sample affine whose (gamma, beta) rows are picked by `codes[n]` from
/// tables of shape (n_codes, C). Throws UnknownDomain for codes out of range.
Var coded_affine(Var x, Var gamma_table, Var beta_table, std::span<const int> codes);

Var instance_norm(Var x, Var gamma, Var beta, double eps = kNormEpsilon);
Var cond_instance_norm(Var x, std::span<const int> codes, Var gamma_table, Var beta_table,
                       double eps = kNormEpsilon);

/// Sums every spatial position: (N, C, ...) -> (N, C).
Var global_sum_pool(Var x);
/// x (N, F), weight (O, F), bias (O) -> (N, O).
Var fully_connected(Var x, Var weight, Var bias);
/// out[n] = <features[n, :], table[rows[n], :]>, shape (N, 1).
Var pair_projection(Var features, Var table, std::span<const int> rows);

/// (N, C, H, W) -> (N, C*H, W).
Var reshape_2d_to_1d(Var x);
/// (N, C*H, W) -> (N, C, H, W). Throws ShapeError if H does not divide C*H.
Var reshape_1d_to_2d(Var x, int height);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double s);
Var add_scalar(Var x, double s);
Var abs(Var x);
Var square(Var x);
Var softplus(Var x);
Var sum(Var x);
Var mean(Var x);

/// Stops gradient flow: a constant copy of `x` on the same graph.
Var detach(Var x);

}  // namespace gi::ad
