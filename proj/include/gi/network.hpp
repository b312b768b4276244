// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Generator (2-1-2D gated CNN, conditional instance norm in the repeat
// blocks) and projection discriminator.
//
// Generator layers, in order, for `base` channels and Q x T input:
//   D1   conv2d k(3,9)        -> 2b  GLU -> b
//   D2   conv2d k(4,8) s2 IN  -> 4b  GLU -> 2b     (Q/2, T/2)
//   D3   conv2d k(4,8) s2 IN  -> 8b  GLU -> 4b     (Q/4, T/4)
//   DC   reshape, conv1d k1 IN -> 4b
//   Ri   conv1d k5 CIN(target) -> 8b GLU -> 4b    (no skip path)
//   UC   conv1d k1 IN -> 4b*Q/4, reshape -> (4b, Q/4, T/4)
//   U1   convT2d k(4,8) s2 IN -> 4b GLU -> 2b
//   U2   convT2d k(4,8) s2 IN -> 2b GLU -> b
//   Out  conv2d k(3,9)        -> 1
// Taps record the value after each layer's last op.

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gi/features.hpp"
#include "gi/graph.hpp"
#include "gi/svcca.hpp"

namespace gi::model {

struct GeneratorConfig {
  int q_features = 36;
  int base_channels = 4;
  int repeat_blocks = 9;
  int n_domains = 4;
  std::uint64_t seed = 0;
  double init_std = 0.02;

  /// Throws ConfigError on invalid geometry.
  void validate() const;
  /// Hash of the geometry fields (not the seed): two configs with equal
  /// fingerprints produce parameter-compatible networks.
  std::uint64_t fingerprint() const;
};

/// Parameters with stable addresses, each owned by a named layer.
class ParameterStore {
 public:
  Parameter& add(const std::string& layer, const std::string& name, Tensor value);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  const std::string& layer_of(std::size_t i) const { return layers_[i]; }

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  std::vector<std::size_t> indices_of_layer(const std::string& layer) const;

  void zero_grad();
  std::size_t value_count() const;

 private:
  std::deque<Parameter> params_;
  std::vector<std::string> layers_;
  std::map<std::string, std::size_t> by_name_;
};

/// Named activations captured during a forward pass.
using Taps = std::map<std::string, ad::Var>;

class Generator {
 public:
  explicit Generator(const GeneratorConfig& cfg);

  const GeneratorConfig& config() const { return cfg_; }
  const std::vector<std::string>& layer_names() const { return layers_; }

  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }

  /// x has shape (N, 1, Q, T) with T >= 4 and divisible by 4; one target
  /// code per sample. Parameters enter as trainable leaves.
  ad::Var forward(ad::Graph& g, ad::Var x, std::span<const int> targets,
                  const std::set<std::string>& tap = {}, Taps* taps = nullptr);
  /// Same computation with parameters as constants.
  ad::Var evaluate(ad::Graph& g, ad::Var x, std::span<const int> targets,
                   const std::set<std::string>& tap = {}, Taps* taps = nullptr) const;

  /// Excludes every parameter of the named layers from gradient updates.
  /// Throws UnknownLayer for names outside layer_names().
  void freeze(const std::set<std::string>& layers);
  std::set<std::string> frozen_layers() const;

 private:
  template <typename ParamFn>
  ad::Var run(ad::Graph& g, ad::Var x, std::span<const int> targets,
              const std::set<std::string>& tap, Taps* taps, ParamFn&& param) const;

  GeneratorConfig cfg_;
  std::vector<std::string> layers_;
  ParameterStore params_;
};

/// Four gated conv2d blocks (stride 2 on the last three), global sum pooling,
/// a scalar FC head and a projection embedding over ordered domain pairs.
class Discriminator {
 public:
  explicit Discriminator(const GeneratorConfig& cfg);

  const GeneratorConfig& config() const { return cfg_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }

  /// Score per sample, shape (N, 1); the projection row is first * N + second.
  ad::Var forward(ad::Graph& g, ad::Var x, std::span<const int> first,
                  std::span<const int> second);
  ad::Var evaluate(ad::Graph& g, ad::Var x, std::span<const int> first,
                   std::span<const int> second) const;

 private:
  template <typename ParamFn>
  ad::Var run(ad::Graph& g, ad::Var x, std::span<const int> first, std::span<const int> second,
              ParamFn&& param) const;

  GeneratorConfig cfg_;
  ParameterStore params_;
};

/// Canonical layer names for N repeat blocks: D1, D2, D3, DC, R1..RN, UC, U1, U2, Out.
std::vector<std::string> generator_layer_names(int repeat_blocks);

/// Rows = channels, columns = (sample, spatial position) pairs in NCHW order.
svcca::ActivationMatrix to_activation_matrix(const Tensor& t, const std::string& layer,
                                             std::uint64_t iteration = 0);

/// Stacks feature sequences of equal size into an (N, 1, Q, T) tensor.
Tensor batch_tensor(std::span<const FeatureSequence> items);

struct Conversion {
  FeatureSequence converted;
  svcca::ActivationDump activations;
};

/// Single-sequence conversion G(x, target) with optional activation taps.
Conversion convert(const Generator& g, const FeatureSequence& x, DomainCode target,
                   const std::set<std::string>& tap = {});

/// Discriminator score for one sequence and ordered (source, target) pair.
double discriminate(const Discriminator& d, const FeatureSequence& x, DomainCode source,
                    DomainCode target);

}  // namespace gi::model
