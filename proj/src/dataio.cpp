// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/dataio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "gi/errors.hpp"

namespace gi {

void FeatureSequence::validate() const {
  if (q() < 4 || frames() < 4)
    throw InvalidData("sequence '" + id + "' is " + std::to_string(q()) + "x" +
                      std::to_string(frames()) + ", need at least 4x4");
  if (!features.allFinite()) throw InvalidData("sequence '" + id + "' has non-finite entries");
  if (domain.index < 0) throw InvalidData("sequence '" + id + "' has a negative domain");
}

}  // namespace gi

namespace gi::data {

namespace {

constexpr char kAmatMagic[] = "AMAT";
constexpr char kFseqMagic[] = "FSEQ";

struct DomainProcess {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  Eigen::MatrixXd mixing;
  double rho = 0.0;
  double f0_mean = 0.0;
  double f0_std = 0.0;
};

DomainProcess draw_domain(int q, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DomainProcess p;
  const double amplitude = 1.0 + 1.5 * unit(rng);
  const double cycles = 0.5 + 2.5 * unit(rng);
  const double phase = 2.0 * std::numbers::pi * unit(rng);
  const double tilt = 2.0 * unit(rng);
  p.mean.resize(q);
  p.scale.resize(q);
  for (int i = 0; i < q; ++i) {
    const double f = static_cast<double>(i) / q;
    p.mean[i] = amplitude * std::cos(2.0 * std::numbers::pi * cycles * f + phase) *
                    std::exp(-tilt * f) +
                0.2 * normal(rng);
    p.scale[i] = 0.4 + unit(rng) * std::exp(-f);
  }
  p.mixing = Eigen::MatrixXd::Identity(q, q);
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < q; ++c) p.mixing(r, c) += 0.35 * normal(rng) / std::sqrt(q);
  p.rho = 0.5 + 0.45 * unit(rng);
  p.f0_mean = std::log(90.0 + 160.0 * unit(rng));
  p.f0_std = 0.1 + 0.2 * unit(rng);
  return p;
}

FeatureSequence draw_sequence(const DomainProcess& p, int domain, int frames, std::string id,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int q = static_cast<int>(p.mean.size());
  const double innovation = std::sqrt(1.0 - p.rho * p.rho);
  Eigen::VectorXd z(q);
  for (int i = 0; i < q; ++i) z[i] = normal(rng);
  double f0 = normal(rng);

  FeatureSequence s;
  s.domain = DomainCode{domain};
  s.id = std::move(id);
  s.features.resize(q, frames);
  s.logf0.resize(frames);
  for (int t = 0; t < frames; ++t) {
    if (t > 0) {
      for (int i = 0; i < q; ++i) z[i] = p.rho * z[i] + innovation * normal(rng);
      f0 = p.rho * f0 + innovation * normal(rng);
    }
    s.features.col(t) = p.mean + p.scale.cwiseProduct(p.mixing * z);
    s.logf0[t] = p.f0_mean + p.f0_std * f0;
  }
  return s;
}

}  // namespace

std::vector<std::vector<std::size_t>> Dataset::by_domain() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(std::max(n_domains, 0)));
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const int d = sequences[i].domain.index;
    if (d < 0 || d >= n_domains)
      throw InvalidData("sequence '" + sequences[i].id + "' has domain " + std::to_string(d) +
                        " outside [0, " + std::to_string(n_domains) + ")");
    out[d].push_back(i);
  }
  return out;
}

void SynthOptions::validate() const {
  if (n_domains < 2) throw ConfigError("synthetic data needs at least 2 domains");
  if (sentences_per_domain < 1) throw ConfigError("sentences_per_domain must be >= 1");
  if (q < 4) throw ConfigError("q must be >= 4");
  if (t_min < 4 || t_max < t_min) throw ConfigError("need 4 <= t_min <= t_max");
}

SynthResult synth_dataset(const SynthOptions& o) {
  o.validate();
  std::mt19937_64 rng(o.seed);
  std::vector<DomainProcess> processes;
  for (int d = 0; d < o.n_domains; ++d) processes.push_back(draw_domain(o.q, rng));

  SynthResult r;
  r.dataset.n_domains = o.n_domains;
  std::uniform_int_distribution<int> length(o.t_min, o.t_max);
  for (int k = 0; k < o.sentences_per_domain; ++k)
    for (int d = 0; d < o.n_domains; ++d) {
      const int frames = length(rng);
      r.dataset.sequences.push_back(draw_sequence(
          processes[d], d, frames, "d" + std::to_string(d) + "_s" + std::to_string(k), rng));
    }
  r.stats = compute_stats(r.dataset);
  return r;
}

DomainStats compute_stats(const Dataset& dataset) {
  const auto groups = dataset.by_domain();
  DomainStats s;
  for (int d = 0; d < dataset.n_domains; ++d) {
    if (groups[d].empty()) throw DegenerateStats("domain " + std::to_string(d) + " is empty");
    const int q = dataset.sequences[groups[d][0]].q();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(q);
    double count = 0.0, f0_sum = 0.0, f0_count = 0.0;
    for (std::size_t i : groups[d]) {
      const auto& seq = dataset.sequences[i];
      if (seq.q() != q) throw InvalidData("domain " + std::to_string(d) + " mixes feature sizes");
      sum += seq.features.rowwise().sum();
      count += seq.frames();
      for (double v : seq.logf0) f0_sum += v;
      f0_count += static_cast<double>(seq.logf0.size());
    }
    const Eigen::VectorXd mean = sum / count;
    const double f0_mean = f0_count > 0 ? f0_sum / f0_count : 0.0;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(q);
    double f0_sq = 0.0;
    for (std::size_t i : groups[d]) {
      const auto& seq = dataset.sequences[i];
      sq += (seq.features.colwise() - mean).array().square().matrix().rowwise().sum();
      for (double v : seq.logf0) f0_sq += (v - f0_mean) * (v - f0_mean);
    }
    const Eigen::VectorXd std = (sq / count).cwiseSqrt();
    for (int k = 0; k < q; ++k)
      if (!(std[k] > 0.0))
        throw DegenerateStats("domain " + std::to_string(d) + " dimension " + std::to_string(k) +
                              " has zero variance");
    s.mean.push_back(mean);
    s.std.push_back(std);
    s.logf0.push_back({f0_mean, f0_count > 0 ? std::sqrt(f0_sq / f0_count) : 0.0});
  }
  return s;
}

Dataset normalize_per_domain(const Dataset& dataset, const DomainStats& stats) {
  if (stats.mean.size() != static_cast<std::size_t>(dataset.n_domains) ||
      stats.std.size() != stats.mean.size())
    throw ShapeMismatch("stats cover " + std::to_string(stats.mean.size()) + " domains, dataset " +
                        std::to_string(dataset.n_domains));
  Dataset out = dataset;
  for (auto& seq : out.sequences) {
    const int d = seq.domain.index;
    if (d < 0 || d >= dataset.n_domains) throw InvalidData("sequence domain out of range");
    const Eigen::VectorXd& mu = stats.mean[d];
    const Eigen::VectorXd& sd = stats.std[d];
    if (mu.size() != seq.q()) throw ShapeMismatch("stats dimension differs from features");
    for (int k = 0; k < sd.size(); ++k)
      if (!(sd[k] > 0.0)) throw DegenerateStats("zero std in domain " + std::to_string(d));
    seq.features = (seq.features.colwise() - mu).array().colwise() / sd.array();
  }
  return out;
}

std::vector<double> convert_logf0(std::span<const double> logf0, const LogF0Stats& source,
                                  const LogF0Stats& target) {
  if (!(source.std > 0.0)) throw DegenerateStats("source log-F0 std must be positive");
  std::vector<double> out(logf0.size());
  for (std::size_t i = 0; i < logf0.size(); ++i)
    out[i] = (logf0[i] - source.mean) / source.std * target.std + target.mean;
  return out;
}

std::string encode_amat(const svcca::ActivationMatrix& m) {
  io::ByteWriter w;
  w.magic(kAmatMagic);
  w.put<std::uint32_t>(kAmatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.data.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.data.cols()));
  w.str(m.layer_name);
  w.put<std::uint64_t>(m.checkpoint_iteration);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m.data;
  w.doubles(rm.data(), static_cast<std::size_t>(rm.size()));
  return w.finish();
}

svcca::ActivationMatrix decode_amat(const std::string& bytes) {
  io::ByteReader r(bytes, kAmatMagic, "AMAT");
  const auto version = r.get<std::uint32_t>();
  if (version != kAmatVersion) throw FormatError("AMAT: unsupported version " + std::to_string(version));
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint64_t>();
  svcca::ActivationMatrix m;
  m.layer_name = r.str();
  m.checkpoint_iteration = r.get<std::uint64_t>();
  if (rows != 0 && cols > bytes.size() / sizeof(double) / rows)
    throw FormatError("AMAT: file truncated");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  r.doubles(rm.data(), static_cast<std::size_t>(rm.size()));
  r.expect_end();
  m.data = rm;
  return m;
}

void write_amat(const svcca::ActivationMatrix& m, const std::string& path) {
  io::write_file(path, encode_amat(m));
}

svcca::ActivationMatrix read_amat(const std::string& path) {
  return decode_amat(io::read_file(path));
}

std::string encode_fseq(const FeatureSequence& s) {
  io::ByteWriter w;
  w.magic(kFseqMagic);
  w.put<std::uint32_t>(kFseqVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.features.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(s.features.cols()));
  w.str(s.id);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.domain.index));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = s.features;
  w.doubles(rm.data(), static_cast<std::size_t>(rm.size()));
  w.put<std::uint64_t>(s.logf0.size());
  w.doubles(s.logf0.data(), s.logf0.size());
  return w.finish();
}

FeatureSequence decode_fseq(const std::string& bytes) {
  io::ByteReader r(bytes, kFseqMagic, "FSEQ");
  const auto version = r.get<std::uint32_t>();
  if (version != kFseqVersion) throw FormatError("FSEQ: unsupported version " + std::to_string(version));
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint64_t>();
  FeatureSequence s;
  s.id = r.str();
  s.domain.index = static_cast<int>(r.get<std::uint32_t>());
  if (rows != 0 && cols > bytes.size() / sizeof(double) / rows)
    throw FormatError("FSEQ: file truncated");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  r.doubles(rm.data(), static_cast<std::size_t>(rm.size()));
  s.features = rm;
  const auto n = r.get<std::uint64_t>();
  if (n > bytes.size() / sizeof(double)) throw FormatError("FSEQ: file truncated");
  s.logf0.resize(n);
  r.doubles(s.logf0.data(), n);
  r.expect_end();
  return s;
}

void write_fseq(const FeatureSequence& s, const std::string& path) {
  io::write_file(path, encode_fseq(s));
}

FeatureSequence read_fseq(const std::string& path) { return decode_fseq(io::read_file(path)); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw FormatError(path + ": bad number '" + cell + "'");
      }
      if (used != cell.size()) throw FormatError(path + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

}  // namespace gi::data
