// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale drivers for the four interpretability experiments and their
// CSV / JSON outputs.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gi/config.hpp"
#include "gi/dataio.hpp"
#include "gi/trainer.hpp"

namespace gi::exp {

inline constexpr const char* kGroupD = "GROUP_D";
inline constexpr const char* kGroupR = "GROUP_R";
inline constexpr const char* kGroupU = "GROUP_U";

struct ReportRow {
  std::uint64_t checkpoint = 0;
  std::string layer;
  double similarity = 0.0;
};

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::uint64_t fingerprint = 0;
  std::vector<ReportRow> rows;

  /// Appends one row per layer followed by GROUP_D, GROUP_R and GROUP_U.
  void add_checkpoint(std::uint64_t iteration, const svcca::LayerSimilarityReport& layers);
  /// Rows of one checkpoint, layers and groups alike.
  std::vector<ReportRow> at(std::uint64_t iteration) const;
  std::vector<std::uint64_t> checkpoints() const;
};

/// Header `experiment,seed,checkpoint,layer,similarity`, 17 significant digits.
std::string to_csv(const std::vector<ExperimentReport>& reports);
void emit_csv(const std::vector<ExperimentReport>& reports, const std::string& path);

struct CsvRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::uint64_t checkpoint = 0;
  std::string layer;
  double similarity = 0.0;
};
/// Throws FormatError on a malformed document.
std::vector<CsvRow> parse_csv(const std::string& text);

/// Synthetic dataset with per-domain normalisation applied.
data::Dataset make_dataset(const config::ExperimentConfig& cfg, std::uint64_t data_seed);

/// All generator layers of a configuration.
std::set<std::string> all_layers(const model::GeneratorConfig& cfg);

struct Exp1Result {
  ExperimentReport report;
  train::TrainResult run;
  std::size_t optimal = 0;
};

/// Trains from scratch and compares every checkpoint with iteration 0.
Exp1Result run_exp1(const config::ExperimentConfig& cfg, const data::Dataset& dataset);

struct Exp2Result {
  ExperimentReport pretransfer;  // "exp2"
  ExperimentReport fresh;        // "exp2-fresh": an untrained network, different seed
  train::TrainResult run;
};

/// Fine-tunes `base` on `dataset_b` for transfer_fraction of the base run
/// length. Throws ConfigError when the checkpoint geometry differs.
Exp2Result run_exp2(const config::ExperimentConfig& cfg, const model::NetworkCheckpoint& base,
                    const data::Dataset& dataset_b);

struct Exp3Variant {
  config::FrozenVariant variant;
  ExperimentReport report;  // "exp3-<name>", checkpoint = the variant's optimal iteration
  bool frozen_bit_equal = false;
  std::uint64_t optimal_iteration = 0;
  train::TrainResult run;
};

struct Exp3Result {
  std::uint64_t baseline_optimal_iteration = 0;
  std::vector<Exp3Variant> variants;
};

/// Frozen variants trained from the same initialisation as the unfrozen
/// baseline; `baseline` is trained here when null.
Exp3Result run_exp3(const config::ExperimentConfig& cfg, const data::Dataset& dataset,
                    const train::TrainResult* baseline = nullptr);

struct DepthRow {
  int depth = 0;
  double adv_g = 0, adv_d = 0, cyc = 0, id = 0, total_g = 0;
  std::vector<std::string> repeat_layers;
  std::vector<std::uint64_t> checkpoints;
  /// checkpoint x repeat layer mean gradient norm over the preceding window.
  std::vector<std::vector<double>> grad_norms;
  /// min over repeat layers of the whole-run mean gradient norm.
  double vanishing_indicator = 0;
  bool converged = false;
  bool diverged = false;
  double mode_collapse_index = 0;
};

struct Exp4Result {
  std::vector<DepthRow> rows;
};

Exp4Result run_exp4(const config::ExperimentConfig& cfg, const data::Dataset& dataset);

void write_exp4_csv(const Exp4Result& r, const std::string& path);

/// Converts one sequence to one target code.
using ConvertFn = std::function<Eigen::MatrixXd(const FeatureSequence&, DomainCode)>;

/// Mean over probe sequences and code pairs i < j of mean |G(x, i) - G(x, j)|,
/// divided by the mean |x| over the probe. Throws InvalidData for a zero input
/// scale, ContractViolation for fewer than 2 domains.
double mode_collapse_index(const ConvertFn& g, const std::vector<FeatureSequence>& probe,
                           int n_domains);
double mode_collapse_index(const model::Generator& g, const std::vector<FeatureSequence>& probe);

}  // namespace gi::exp
