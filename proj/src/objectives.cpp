// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/objectives.hpp"

#include <cmath>

#include "gi/errors.hpp"
#include "gi/ops.hpp"

namespace gi::objectives {

namespace {

void check_scores(const ad::Var& s, const char* what) {
  if (s.shape().size() != 2 || s.shape()[1] != 1)
    throw ShapeError(std::string(what) + ": expected (N, 1) scores, got " + to_string(s.shape()));
}

void check_same(const ad::Var& a, const ad::Var& b, const char* what) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(what) + ": " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
}

ad::Var neg(ad::Var x) { return ad::scale(x, -1.0); }

}  // namespace

void LossWeights::validate() const {
  if (!(lambda_cyc >= 0.0) || !std::isfinite(lambda_cyc))
    throw ConfigError("lambda_cyc must be a finite non-negative number");
  if (!(lambda_id >= 0.0) || !std::isfinite(lambda_id))
    throw ConfigError("lambda_id must be a finite non-negative number");
}

GeneratorFn trainable(model::Generator& g, ad::Graph& graph) {
  return [&g, &graph](ad::Var x, std::span<const int> t) { return g.forward(graph, x, t); };
}

GeneratorFn fixed(const model::Generator& g, ad::Graph& graph) {
  return [&g, &graph](ad::Var x, std::span<const int> t) { return g.evaluate(graph, x, t); };
}

DiscriminatorFn trainable(model::Discriminator& d, ad::Graph& graph) {
  return [&d, &graph](ad::Var x, std::span<const int> a, std::span<const int> b) {
    return d.forward(graph, x, a, b);
  };
}

DiscriminatorFn fixed(const model::Discriminator& d, ad::Graph& graph) {
  return [&d, &graph](ad::Var x, std::span<const int> a, std::span<const int> b) {
    return d.evaluate(graph, x, a, b);
  };
}

ad::Var adv_loss_d_scores(ad::Var real_scores, ad::Var fake_scores, AdversarialForm form) {
  check_scores(real_scores, "adv_loss_d");
  check_scores(fake_scores, "adv_loss_d");
  if (form == AdversarialForm::Log)
    return ad::add(ad::mean(ad::softplus(neg(real_scores))), ad::mean(ad::softplus(fake_scores)));
  return ad::add(ad::mean(ad::square(ad::add_scalar(real_scores, -1.0))),
                 ad::mean(ad::square(fake_scores)));
}

ad::Var adv_loss_g_scores(ad::Var fake_scores, AdversarialForm form) {
  check_scores(fake_scores, "adv_loss_g");
  if (form == AdversarialForm::Log) return ad::mean(ad::softplus(neg(fake_scores)));
  return ad::mean(ad::square(ad::add_scalar(fake_scores, -1.0)));
}

ad::Var adv_loss_d(const DiscriminatorFn& d, ad::Var x_real, std::span<const int> c,
                   ad::Var x_fake, std::span<const int> c_hat, AdversarialForm form) {
  check_same(x_real, x_fake, "adv_loss_d");
  const ad::Var real = d(x_real, c_hat, c);
  const ad::Var fake = d(ad::detach(x_fake), c, c_hat);
  return adv_loss_d_scores(real, fake, form);
}

ad::Var adv_loss_g(const DiscriminatorFn& d, ad::Var x_fake, std::span<const int> c,
                   std::span<const int> c_hat, AdversarialForm form) {
  return adv_loss_g_scores(d(x_fake, c, c_hat), form);
}

ad::Var l1_mean(ad::Var a, ad::Var b) {
  check_same(a, b, "l1_mean");
  return ad::mean(ad::abs(ad::sub(a, b)));
}

ad::Var cycle_loss(const GeneratorFn& g, ad::Var x, std::span<const int> c,
                   std::span<const int> c_hat) {
  return cycle_loss_from(g, x, g(x, c_hat), c);
}

ad::Var cycle_loss_from(const GeneratorFn& g, ad::Var x, ad::Var x_fake, std::span<const int> c) {
  return l1_mean(x, g(x_fake, c));
}

ad::Var identity_loss(const GeneratorFn& g, ad::Var x, std::span<const int> c) {
  return l1_mean(g(x, c), x);
}

bool identity_active(const LossWeights& w, std::uint64_t iteration) {
  return iteration < w.id_cutoff_iterations;
}

ad::Var full_g_objective(ad::Var adv, ad::Var cyc, ad::Var id, const LossWeights& w,
                         std::uint64_t iteration) {
  ad::Var total = ad::add(adv, ad::scale(cyc, w.lambda_cyc));
  if (identity_active(w, iteration)) {
    if (!id.valid()) throw ContractViolation("identity loss required before the cutoff");
    total = ad::add(total, ad::scale(id, w.lambda_id));
  }
  return total;
}

ad::Var full_d_objective(ad::Var adv_d) { return adv_d; }

double full_g_value(double adv, double cyc, double id, const LossWeights& w,
                    std::uint64_t iteration) {
  double total = adv + w.lambda_cyc * cyc;
  if (identity_active(w, iteration)) total += w.lambda_id * id;
  return total;
}

}  // namespace gi::objectives
