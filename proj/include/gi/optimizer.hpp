// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gi/tensor.hpp"

namespace gi::model {
class ParameterStore;
}

namespace gi::optim {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moments per parameter, in store order.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update of `theta` in place. `t` is the 1-based
/// step index. Throws DivergenceError on a non-finite gradient.
void adam_step(std::span<double> theta, std::span<const double> grad, std::span<double> m,
               std::span<double> v, std::uint64_t t, const AdamHyper& hyper);

/// Zero moments shaped like every parameter of the store.
AdamState zero_state(const model::ParameterStore& params);

/// Updates every unfrozen parameter from its `grad`. All gradients are
/// checked for finiteness before any value changes.
void adam_update(model::ParameterStore& params, AdamState& state, const AdamHyper& hyper);

}  // namespace gi::optim
