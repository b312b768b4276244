// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON run configuration. Every section and key is optional; unknown keys
// are rejected.
//
//   {
//     "seed": 0,
//     "model": {"q_features": 36, "base_channels": 4, "repeat_blocks": 9,
//               "n_domains": 4, "init_std": 0.02},
//     "train": {"total_iterations": 2000, "checkpoint_every": 200,
//               "batch_size": 4, "crop_frames": 64, "lr_g": 1e-4, "lr_d": 1e-4,
//               "beta1": 0.5, "beta2": 0.999, "adam_eps": 1e-8,
//               "lambda_cyc": 10, "lambda_id": 5, "id_cutoff_iterations": 100,
//               "adversarial": "least_squares" | "log",
//               "optimal": "lowest_total_g" | "final",
//               "frozen_layers": [], "init_from": "path"},
//     "data": {"sentences_per_domain": 24, "t_min": 64, "t_max": 160,
//              "seed": 1, "transfer_seed": 2},
//     "probe": {"sequences": 64, "frames": 64},
//     "svcca": {"variance_threshold": 0.99, "ridge": 1e-10},
//     "experiment": {"seeds": [0], "depths": [3, 5, 7, 9, 11, 13, 15],
//                    "variants": {"A": ["R2", "R3"]}, "transfer_fraction": 0.5,
//                    "base_checkpoint": "path"}
//   }
//
// id_cutoff_iterations defaults to total_iterations / 20.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gi/svcca.hpp"
#include "gi/trainer.hpp"

namespace gi::config {

struct DataConfig {
  int sentences_per_domain = 24;
  int t_min = 64;
  int t_max = 160;
  std::uint64_t seed = 1;
  std::uint64_t transfer_seed = 2;
};

struct ProbeConfig {
  int sequences = 64;
  int frames = 64;
};

struct FrozenVariant {
  std::string name;
  std::set<std::string> layers;
};

/// A = {R2, R3}, B = {R4, R5}, C = {R6, R7, R8}.
std::vector<FrozenVariant> standard_variants();

struct ExperimentConfig {
  train::TrainConfig train;
  DataConfig data;
  ProbeConfig probe;
  svcca::SvccaOptions svcca;
  std::vector<std::uint64_t> seeds = {0};
  std::vector<int> depths = {3, 5, 7, 9, 11, 13, 15};
  std::vector<FrozenVariant> variants = standard_variants();
  double transfer_fraction = 0.5;
  std::optional<std::string> base_checkpoint;

  /// Throws ConfigError.
  void validate() const;
  /// Copy with the training and model seeds set to `seed`.
  ExperimentConfig with_seed(std::uint64_t seed) const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace gi::config
