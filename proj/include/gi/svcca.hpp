// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Singular vector canonical correlation analysis between layer activations.
//
// Pipeline: centre each neuron's activation vector, keep the leading singular
// directions that explain the requested share of variance, then take the
// canonical correlations between the two reduced subspaces. The similarity of
// two layers is the mean canonical correlation.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gi::svcca {

inline constexpr double kDefaultVarianceThreshold = 0.99;
inline constexpr double kDefaultRidge = 1e-10;

/// Neuron-by-datapoint activations of one named layer. Convolutional layers
/// contribute one row per channel and one column per (sample, position).
struct ActivationMatrix {
  std::string layer_name;
  Eigen::MatrixXd data;
  std::uint64_t checkpoint_iteration = 0;

  /// Throws InvalidData unless rows >= 1, cols >= rows and entries are finite.
  void validate() const;
};

/// Leading principal-component time series of a centred activation matrix.
struct ReducedSubspace {
  Eigen::MatrixXd basis_projection;  // retained x datapoints
  int retained = 0;
  double variance_fraction_achieved = 1.0;

  /// Wraps an arbitrary matrix as a subspace that keeps every row.
  static ReducedSubspace from_matrix(Eigen::MatrixXd m);
};

struct CcaResult {
  Eigen::VectorXd correlations;  // descending, in [0, 1]
  int retained_x = 0;
  int retained_y = 0;

  double mean() const;
};

ActivationMatrix center_rows(const ActivationMatrix& m);

/// Keeps the smallest k with sum_{i<=k} s_i^2 / sum s_i^2 >= threshold.
/// Expects centred input; throws DegenerateSubspace for an all-zero matrix.
ReducedSubspace svd_reduce(const ActivationMatrix& m,
                           double variance_threshold = kDefaultVarianceThreshold);

/// Canonical correlations: singular values of Sxx^-1/2 Sxy Syy^-1/2 with
/// `ridge` times the mean variance added to each auto-covariance diagonal.
CcaResult cca(const ReducedSubspace& x, const ReducedSubspace& y, double ridge = kDefaultRidge);

/// Full pipeline returning the canonical correlations.
CcaResult svcca(const ActivationMatrix& a, const ActivationMatrix& b,
                double variance_threshold = kDefaultVarianceThreshold,
                double ridge = kDefaultRidge);

/// Mean canonical correlation of the full pipeline, in [0, 1].
double svcca_similarity(const ActivationMatrix& a, const ActivationMatrix& b,
                        double variance_threshold = kDefaultVarianceThreshold,
                        double ridge = kDefaultRidge);

// -- layer-level workflow ---------------------------------------------------

using ActivationDump = std::vector<ActivationMatrix>;

/// One (layer, similarity) entry per layer in canonical generator order.
using LayerSimilarityReport = std::vector<std::pair<std::string, double>>;

struct GroupSummary {
  double downsample = 0.0;  // D1, D2, D3, DC
  double repeat = 0.0;      // R1 ... RN
  double upsample = 0.0;    // UC, U1, U2, Out
};

enum class LayerGroup { Downsample, Repeat, Upsample };

/// Sort key for the canonical order D1, D2, D3, DC, R1..RN, UC, U1, U2, Out.
/// Throws UnknownLayer for names outside that scheme.
int layer_rank(const std::string& name);
LayerGroup layer_group(const std::string& name);

struct SvccaOptions {
  double variance_threshold = kDefaultVarianceThreshold;
  double ridge = kDefaultRidge;
};

/// Per-layer similarity between two dumps over the same probe datapoints.
/// Throws LayerSetMismatch when the layer-name sets differ.
LayerSimilarityReport compare_checkpoints(const ActivationDump& a, const ActivationDump& b,
                                          const SvccaOptions& options = {});

GroupSummary group_summary(const LayerSimilarityReport& report);

}  // namespace gi::svcca
