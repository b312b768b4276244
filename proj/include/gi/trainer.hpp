// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic alternating D/G training with Adam.
//
// Each iteration samples one batch, runs G(x, c_hat) once, updates D on the
// detached fake, then updates G against the freshly updated D with the
// cycle term and, before the cutoff, the identity term.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gi/checkpoint.hpp"
#include "gi/dataio.hpp"
#include "gi/network.hpp"
#include "gi/objectives.hpp"
#include "gi/optimizer.hpp"
#include "gi/svcca.hpp"

namespace gi::train {

enum class OptimalRule { LowestTotalG, Final };

struct TrainConfig {
  model::GeneratorConfig model;
  std::uint64_t total_iterations = 2000;
  std::uint64_t checkpoint_every = 200;
  int batch_size = 4;
  int crop_frames = 64;
  double lr_g = 1e-4;
  double lr_d = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  objectives::LossWeights weights;
  objectives::AdversarialForm adversarial = objectives::AdversarialForm::LeastSquares;
  std::set<std::string> frozen_layers;
  std::uint64_t seed = 0;
  std::optional<std::string> init_from;
  OptimalRule optimal = OptimalRule::LowestTotalG;

  /// Throws ConfigError when checkpoint_every does not divide the run,
  /// crop_frames is not a positive multiple of 4, or a rate is invalid.
  void validate() const;
};

struct Batch {
  Tensor x;  // (B, 1, Q, crop)
  std::vector<int> source;
  std::vector<int> target;
};

/// Source domain uniform, target uniform over the other domains, sentence
/// uniform within the source domain, crop offset uniform over valid offsets.
/// Sequences shorter than the crop wrap around.
Batch sample_batch(const data::Dataset& dataset, std::mt19937_64& rng, int batch_size,
                   int crop_frames);

struct IterationRecord {
  std::uint64_t iteration = 0;
  double adv_g = 0, adv_d = 0, cyc = 0, id = 0, total_g = 0, total_d = 0;
  double grad_norm_max = 0;
  std::vector<double> layer_grad_norms;  // generator layers, canonical order
  double wall_seconds = 0;
};

struct TrainLog {
  std::vector<std::string> layer_names;
  std::vector<IterationRecord> records;
  bool diverged = false;
  std::string divergence_message;

  /// Columns: iteration, adv_g, adv_d, cyc, id, total_g, total_d, grad_norm_max.
  void write_csv(const std::string& path) const;
  /// Mean total_g over records [begin, end).
  double mean_total_g(std::size_t begin, std::size_t end) const;
};

class Trainer {
 public:
  /// Fresh networks from cfg.model, or parameters from cfg.init_from with
  /// fresh optimizer moments when that path is set.
  Trainer(const TrainConfig& cfg, const data::Dataset& dataset);
  /// Continues exactly from a checkpoint written by a run with the same config.
  Trainer(const TrainConfig& cfg, const data::Dataset& dataset,
          const model::NetworkCheckpoint& resume);

  /// Transfer mode: network parameters from `init`, fresh moments, iteration 0.
  static Trainer transfer(const TrainConfig& cfg, const data::Dataset& dataset,
                          const model::NetworkCheckpoint& init);

  void step();
  std::uint64_t iteration() const { return iteration_; }

  model::NetworkCheckpoint checkpoint() const;
  const model::Generator& generator() const { return g_; }
  const model::Discriminator& discriminator() const { return d_; }
  const TrainLog& log() const { return log_; }
  TrainLog& log() { return log_; }

 private:
  Trainer(const TrainConfig& cfg, const data::Dataset& dataset, int);
  void apply_freeze();

  TrainConfig cfg_;
  const data::Dataset* dataset_;
  model::Generator g_;
  model::Discriminator d_;
  optim::AdamState adam_g_;
  optim::AdamState adam_d_;
  std::mt19937_64 rng_;
  std::uint64_t iteration_ = 0;
  TrainLog log_;
};

struct TrainResult {
  std::vector<model::NetworkCheckpoint> checkpoints;  // iteration 0 first
  TrainLog log;
  bool diverged = false;

  const model::NetworkCheckpoint& final_checkpoint() const { return checkpoints.back(); }
  /// Index into `checkpoints` chosen by the rule.
  std::size_t optimal_index(OptimalRule rule, std::uint64_t window) const;
};

using CheckpointHook = std::function<void(const model::NetworkCheckpoint&)>;

/// Runs to cfg.total_iterations, capturing a checkpoint at iteration 0 and
/// every checkpoint_every iterations. A DivergenceError stops the run and is
/// reported through `diverged`.
TrainResult train(const TrainConfig& cfg, const data::Dataset& dataset,
                  const CheckpointHook& hook = {});
/// Continues `trainer` up to cfg.total_iterations with the same cadence.
TrainResult run(Trainer& trainer, const TrainConfig& cfg, const CheckpointHook& hook = {});

/// Fixed probe inputs shared by every checkpoint under comparison.
struct ProbeSet {
  std::vector<FeatureSequence> sequences;  // equal length
  std::vector<int> targets;
};

/// First `count` sequences taken round-robin over domains, cut (or wrapped)
/// to `frames`, each converted to domain (c + 1) mod N.
ProbeSet make_probe(const data::Dataset& dataset, int count, int frames);

/// Channels x (probe sample, position) per requested generator layer, in
/// canonical order. Throws LayerSetMismatch for names the network lacks.
svcca::ActivationDump record_activations(const model::Generator& g, const ProbeSet& probe,
                                         const std::set<std::string>& layers,
                                         std::uint64_t iteration = 0);
svcca::ActivationDump record_activations(const model::NetworkCheckpoint& ckpt,
                                         const ProbeSet& probe,
                                         const std::set<std::string>& layers);

}  // namespace gi::train
