// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/optimizer.hpp"

#include <cmath>

#include "gi/errors.hpp"
#include "gi/network.hpp"

namespace gi::optim {

void adam_step(std::span<double> theta, std::span<const double> grad, std::span<double> m,
               std::span<double> v, std::uint64_t t, const AdamHyper& hyper) {
  if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size())
    throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
  if (!(hyper.eps > 0.0)) throw ContractViolation("adam eps must be positive");
  if (t == 0) throw ContractViolation("adam step index is 1-based");
  for (double g : grad)
    if (!std::isfinite(g)) throw DivergenceError("non-finite gradient");

  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * grad[i];
    v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    theta[i] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
  }
}

AdamState zero_state(const model::ParameterStore& params) {
  AdamState s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m.emplace_back(params[i].value.shape());
    s.v.emplace_back(params[i].value.shape());
  }
  return s;
}

void adam_update(model::ParameterStore& params, AdamState& state, const AdamHyper& hyper) {
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw ShapeError("adam state does not match the parameter store");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params[i];
    if (p.frozen) continue;
    if (!p.grad.all_finite()) throw DivergenceError("non-finite gradient in " + p.name);
  }
  ++state.step;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (p.frozen) continue;
    adam_step(p.value.data(), p.grad.data(), state.m[i].data(), state.v[i].data(), state.step,
              hyper);
  }
}

}  // namespace gi::optim
