// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace gi {

/// Index of a speaker domain in [0, n_domains).
struct DomainCode {
  int index = 0;
  friend bool operator==(DomainCode, DomainCode) = default;
};

/// A Q x T acoustic feature image (MCEP-like rows, frames as columns) with its
/// source domain. `logf0` is an optional per-frame log-F0 track.
struct FeatureSequence {
  Eigen::MatrixXd features;
  DomainCode domain;
  std::string id;
  std::vector<double> logf0;

  int q() const { return static_cast<int>(features.rows()); }
  int frames() const { return static_cast<int>(features.cols()); }

  /// Throws InvalidData unless Q >= 4, T >= 4 and entries are finite.
  void validate() const;
};

}  // namespace gi
