// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Source-and-target adversarial, cycle-consistency and identity-mapping
// losses. Networks enter as callables so the losses can be evaluated against
// hand-built stand-ins as well as the real generator and discriminator.

#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "gi/graph.hpp"
#include "gi/network.hpp"

namespace gi::objectives {

struct LossWeights {
  double lambda_cyc = 10.0;
  double lambda_id = 5.0;
  std::uint64_t id_cutoff_iterations = 100;

  /// Throws ConfigError on a negative or non-finite weight.
  void validate() const;
};

enum class AdversarialForm { LeastSquares, Log };

/// G(x, targets).
using GeneratorFn = std::function<ad::Var(ad::Var x, std::span<const int> targets)>;
/// D(x, first, second): one score per sample.
using DiscriminatorFn =
    std::function<ad::Var(ad::Var x, std::span<const int> first, std::span<const int> second)>;

GeneratorFn trainable(model::Generator& g, ad::Graph& graph);
GeneratorFn fixed(const model::Generator& g, ad::Graph& graph);
DiscriminatorFn trainable(model::Discriminator& d, ad::Graph& graph);
DiscriminatorFn fixed(const model::Discriminator& d, ad::Graph& graph);

/// Least squares: mean (real - 1)^2 + mean fake^2.
/// Log form: mean softplus(-real) + mean softplus(fake).
ad::Var adv_loss_d_scores(ad::Var real_scores, ad::Var fake_scores,
                          AdversarialForm form = AdversarialForm::LeastSquares);
/// Least squares: mean (fake - 1)^2. Log form: mean softplus(-fake).
ad::Var adv_loss_g_scores(ad::Var fake_scores,
                          AdversarialForm form = AdversarialForm::LeastSquares);

/// Real x of domain c is scored under the pair (c_hat, c); the fake G(x, c_hat)
/// under (c, c_hat). The fake is detached before scoring.
ad::Var adv_loss_d(const DiscriminatorFn& d, ad::Var x_real, std::span<const int> c,
                   ad::Var x_fake, std::span<const int> c_hat,
                   AdversarialForm form = AdversarialForm::LeastSquares);
ad::Var adv_loss_g(const DiscriminatorFn& d, ad::Var x_fake, std::span<const int> c,
                   std::span<const int> c_hat,
                   AdversarialForm form = AdversarialForm::LeastSquares);

/// mean |a - b|.
ad::Var l1_mean(ad::Var a, ad::Var b);

/// mean |x - G(G(x, c_hat), c)|.
ad::Var cycle_loss(const GeneratorFn& g, ad::Var x, std::span<const int> c,
                   std::span<const int> c_hat);
/// Same, reusing an already computed G(x, c_hat).
ad::Var cycle_loss_from(const GeneratorFn& g, ad::Var x, ad::Var x_fake, std::span<const int> c);
/// mean |G(x, c) - x|.
ad::Var identity_loss(const GeneratorFn& g, ad::Var x, std::span<const int> c);

/// adv + lambda_cyc * cyc + lambda_id * id, the last term only while
/// iteration < id_cutoff_iterations. `id` may be invalid past the cutoff.
ad::Var full_g_objective(ad::Var adv, ad::Var cyc, ad::Var id, const LossWeights& w,
                         std::uint64_t iteration);
ad::Var full_d_objective(ad::Var adv_d);

/// Scalar forms of the same combinations.
double full_g_value(double adv, double cyc, double id, const LossWeights& w,
                    std::uint64_t iteration);
bool identity_active(const LossWeights& w, std::uint64_t iteration);

}  // namespace gi::objectives
