// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gi/graph.hpp"

namespace gi::ad {

/// Builds a scalar from graph inputs created for the tensors under test.
using ScalarFn = std::function<Var(Graph&, std::span<const Var>)>;

/// Maximum over every input coordinate of
///   |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
/// where numeric is the central difference with the given step.
double grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs, double step = 1e-5);

/// Same measure over the coordinates of parameters consumed by `fn` via
/// Graph::param. Parameter gradients are zeroed first and left holding the
/// analytic gradient.
enum class ErrorMeasure {
  /// max_i |a_i - n_i| / max(|a_i|, |n_i|, 1e-8)
  Elementwise,
  /// max over tensors of ||a - n||_2 / max(||a||_2, ||n||_2, 1e-8)
  PerTensor,
};

double grad_check_params(const std::function<Var(Graph&)>& fn,
                         std::span<Parameter* const> params, double step = 1e-5,
                         ErrorMeasure measure = ErrorMeasure::Elementwise);

/// sum(y * weights): reduces a tensor op to a scalar with a fixed random
/// cotangent so every output coordinate is exercised.
Var project(Var y, const Tensor& weights);

}  // namespace gi::ad
