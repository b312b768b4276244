// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "gi/errors.hpp"
#include "gi/ops.hpp"

namespace gi::ad {

namespace {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

}  // namespace

double grad_check(const ScalarFn& fn, const std::vector<Tensor>& inputs, double step) {
  if (!(step > 0.0)) throw ContractViolation("grad_check step must be positive");
  auto evaluate = [&](const std::vector<Tensor>& values, std::vector<Tensor>* grads) {
    Graph g;
    std::vector<Var> vars;
    vars.reserve(values.size());
    for (const Tensor& t : values) vars.push_back(g.input(t, true));
    Var out = fn(g, vars);
    if (grads) {
      g.backward(out);
      for (const Var& v : vars) grads->push_back(g.grad(v));
    }
    return out.value()[0];
  };

  std::vector<Tensor> analytic;
  evaluate(inputs, &analytic);

  std::vector<Tensor> probe = inputs;
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    for (std::size_t i = 0; i < probe[k].size(); ++i) {
      const double saved = probe[k][i];
      probe[k][i] = saved + step;
      const double plus = evaluate(probe, nullptr);
      probe[k][i] = saved - step;
      const double minus = evaluate(probe, nullptr);
      probe[k][i] = saved;
      worst = std::max(worst, relative_error(analytic[k][i], (plus - minus) / (2.0 * step)));
    }
  }
  return worst;
}

double grad_check_params(const std::function<Var(Graph&)>& fn,
                         std::span<Parameter* const> params, double step,
                         ErrorMeasure measure) {
  if (!(step > 0.0)) throw ContractViolation("grad_check step must be positive");
  for (Parameter* p : params) p->grad = Tensor(p->value.shape());
  {
    Graph g;
    g.backward(fn(g));
  }
  auto evaluate = [&] {
    Graph g;
    return fn(g).value()[0];
  };
  double worst = 0.0;
  for (Parameter* p : params) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + step;
      const double plus = evaluate();
      p->value[i] = saved - step;
      const double minus = evaluate();
      p->value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double analytic = p->grad[i];
      if (measure == ErrorMeasure::Elementwise) {
        worst = std::max(worst, relative_error(analytic, numeric));
      } else {
        diff2 += (analytic - numeric) * (analytic - numeric);
        a2 += analytic * analytic;
        n2 += numeric * numeric;
      }
    }
    if (measure == ErrorMeasure::PerTensor)
      worst = std::max(worst, std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-8}));
  }
  return worst;
}

Var project(Var y, const Tensor& weights) {
  return sum(mul(y, y.graph().constant(weights.reshaped(y.shape()))));
}

}  // namespace gi::ad
