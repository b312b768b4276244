// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic multi-domain feature sequences, speaker-wise normalisation, the
// log-F0 transform and the AMAT / FSEQ binary containers.
//
// AMAT: "AMAT", u32 version=1, u32 rows, u64 cols, u32 name length, name
// bytes, u64 checkpoint_iteration, row-major f64 payload, CRC32.
// FSEQ: "FSEQ", u32 version=1, u32 rows, u64 cols, u32 id length, id bytes,
// u32 domain, row-major f64 features, u64 logf0 length, f64 logf0, CRC32.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gi/features.hpp"
#include "gi/svcca.hpp"

namespace gi::data {

struct Dataset {
  int n_domains = 0;
  std::vector<FeatureSequence> sequences;

  /// Sequence indices per domain; throws InvalidData for an out-of-range code.
  std::vector<std::vector<std::size_t>> by_domain() const;
};

struct LogF0Stats {
  double mean = 0.0;
  double std = 1.0;
};

struct DomainStats {
  std::vector<Eigen::VectorXd> mean;  // per domain, Q entries
  std::vector<Eigen::VectorXd> std;   // population std
  std::vector<LogF0Stats> logf0;
};

struct SynthOptions {
  int n_domains = 4;
  int sentences_per_domain = 24;
  int q = 36;
  int t_min = 64;
  int t_max = 160;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthResult {
  Dataset dataset;
  DomainStats stats;
};

/// Each domain has its own mean spectrum, per-dimension scale, mixing matrix
/// and AR(1) time constant over a shared latent process. Stats are measured
/// on the generated data.
SynthResult synth_dataset(const SynthOptions& options);

/// Throws DegenerateStats for an empty domain or a zero-variance dimension.
DomainStats compute_stats(const Dataset& dataset);

/// Per-domain, per-dimension z-score.
Dataset normalize_per_domain(const Dataset& dataset, const DomainStats& stats);

/// (x - mu_src) / sigma_src * sigma_tgt + mu_tgt.
std::vector<double> convert_logf0(std::span<const double> logf0, const LogF0Stats& source,
                                  const LogF0Stats& target);

inline constexpr std::uint32_t kAmatVersion = 1;
inline constexpr std::uint32_t kFseqVersion = 1;

std::string encode_amat(const svcca::ActivationMatrix& m);
svcca::ActivationMatrix decode_amat(const std::string& bytes);
void write_amat(const svcca::ActivationMatrix& m, const std::string& path);
svcca::ActivationMatrix read_amat(const std::string& path);

std::string encode_fseq(const FeatureSequence& s);
FeatureSequence decode_fseq(const std::string& bytes);
void write_fseq(const FeatureSequence& s, const std::string& path);
FeatureSequence read_fseq(const std::string& path);

/// Debug dump: one row per line, 17 significant digits, comma separated.
void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

/// "%.17g" formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace gi::data
