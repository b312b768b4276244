// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/svcca.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "gi/errors.hpp"

namespace gi::svcca {

namespace {

// Variance shares are compared with this much slack so that a threshold of
// exactly 1.0 is reachable despite round-off in the cumulative sum.
constexpr double kShareSlack = 1e-12;

// Relative eigenvalue floor below which an unregularised covariance counts as
// singular.
constexpr double kSingularTolerance = 1e-12;

Eigen::MatrixXd centered(const Eigen::MatrixXd& m) {
  return m.colwise() - m.rowwise().mean();
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& cov, double ridge, const char* which) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw SingularCovariance(std::string(which) + " covariance eigendecomposition failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double top = lambda.maxCoeff();
  const double floor = ridge > 0.0 ? 0.0 : kSingularTolerance * std::max(top, 0.0);
  if (!(top > 0.0) || lambda.minCoeff() <= floor)
    throw SingularCovariance(std::string(which) + " auto-covariance is singular (min eigenvalue " +
                             std::to_string(lambda.minCoeff()) + ")");
  const Eigen::VectorXd scale = lambda.array().rsqrt();
  return eig.eigenvectors() * scale.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

void ActivationMatrix::validate() const {
  if (data.rows() < 1)
    throw InvalidData("layer '" + layer_name + "' has no neurons");
  if (data.cols() < data.rows())
    throw InvalidData("layer '" + layer_name + "' has " + std::to_string(data.cols()) +
                      " datapoints for " + std::to_string(data.rows()) + " neurons");
  if (!data.allFinite())
    throw InvalidData("layer '" + layer_name + "' contains non-finite activations");
}

ReducedSubspace ReducedSubspace::from_matrix(Eigen::MatrixXd m) {
  ReducedSubspace s;
  s.retained = static_cast<int>(m.rows());
  s.basis_projection = std::move(m);
  return s;
}

double CcaResult::mean() const {
  if (correlations.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  return correlations.mean();
}

ActivationMatrix center_rows(const ActivationMatrix& m) {
  if (!m.data.allFinite())
    throw InvalidData("layer '" + m.layer_name + "' contains non-finite activations");
  ActivationMatrix out = m;
  if (m.data.cols() > 0) out.data = centered(m.data);
  return out;
}

ReducedSubspace svd_reduce(const ActivationMatrix& m, double variance_threshold) {
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw ContractViolation("variance threshold must lie in (0, 1], got " +
                            std::to_string(variance_threshold));
  if (!m.data.allFinite())
    throw InvalidData("layer '" + m.layer_name + "' contains non-finite activations");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(m.data, Eigen::ComputeThinU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double total = s.squaredNorm();
  if (!(total > 0.0))
    throw DegenerateSubspace("layer '" + m.layer_name + "' has zero variance");

  int k = 0;
  double cumulative = 0.0;
  while (k < s.size()) {
    cumulative += s[k] * s[k];
    ++k;
    if (cumulative / total >= variance_threshold - kShareSlack) break;
  }

  ReducedSubspace out;
  out.retained = k;
  out.variance_fraction_achieved = std::min(1.0, cumulative / total);
  out.basis_projection = svd.matrixU().leftCols(k).transpose() * m.data;
  return out;
}

CcaResult cca(const ReducedSubspace& x, const ReducedSubspace& y, double ridge) {
  if (ridge < 0.0) throw ContractViolation("ridge must be non-negative");
  const Eigen::MatrixXd& xm = x.basis_projection;
  const Eigen::MatrixXd& ym = y.basis_projection;
  if (xm.cols() != ym.cols())
    throw ShapeMismatch("datapoint counts differ: " + std::to_string(xm.cols()) + " vs " +
                        std::to_string(ym.cols()));
  if (xm.rows() < 1 || ym.rows() < 1)
    throw ShapeMismatch("empty subspace passed to cca");
  if (xm.cols() < 2) throw ShapeMismatch("cca needs at least two datapoints");

  const Eigen::MatrixXd xc = centered(xm);
  const Eigen::MatrixXd yc = centered(ym);
  const double norm = 1.0 / static_cast<double>(xm.cols() - 1);
  Eigen::MatrixXd sxx = norm * xc * xc.transpose();
  Eigen::MatrixXd syy = norm * yc * yc.transpose();
  const Eigen::MatrixXd sxy = norm * xc * yc.transpose();
  // relative to the mean variance, so rescaling an input leaves the result unchanged
  sxx.diagonal().array() += ridge * sxx.trace() / static_cast<double>(sxx.rows());
  syy.diagonal().array() += ridge * syy.trace() / static_cast<double>(syy.rows());

  const Eigen::MatrixXd t = inverse_sqrt(sxx, ridge, "x") * sxy * inverse_sqrt(syy, ridge, "y");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t);

  CcaResult r;
  r.retained_x = static_cast<int>(xm.rows());
  r.retained_y = static_cast<int>(ym.rows());
  r.correlations = svd.singularValues().cwiseMax(0.0).cwiseMin(1.0);
  return r;
}

CcaResult svcca(const ActivationMatrix& a, const ActivationMatrix& b, double variance_threshold,
                double ridge) {
  a.validate();
  b.validate();
  if (a.data.cols() != b.data.cols())
    throw ShapeMismatch("layers '" + a.layer_name + "' and '" + b.layer_name +
                        "' have different datapoint counts");
  const ReducedSubspace ra = svd_reduce(center_rows(a), variance_threshold);
  const ReducedSubspace rb = svd_reduce(center_rows(b), variance_threshold);
  return cca(ra, rb, ridge);
}

double svcca_similarity(const ActivationMatrix& a, const ActivationMatrix& b,
                        double variance_threshold, double ridge) {
  return svcca(a, b, variance_threshold, ridge).mean();
}

int layer_rank(const std::string& name) {
  static const std::map<std::string, int> fixed = {
      {"D1", 0},       {"D2", 1},       {"D3", 2},       {"DC", 3},
      {"UC", 1 << 20}, {"U1", (1 << 20) + 1}, {"U2", (1 << 20) + 2}, {"Out", (1 << 20) + 3}};
  if (auto it = fixed.find(name); it != fixed.end()) return it->second;
  if (name.size() >= 2 && name[0] == 'R' &&
      std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const int idx = std::stoi(name.substr(1));
    if (idx >= 1 && idx < (1 << 19)) return 16 + idx;
  }
  throw UnknownLayer("'" + name + "' is not a generator layer name");
}

LayerGroup layer_group(const std::string& name) {
  const int rank = layer_rank(name);
  if (rank < 16) return LayerGroup::Downsample;
  if (rank < (1 << 20)) return LayerGroup::Repeat;
  return LayerGroup::Upsample;
}

LayerSimilarityReport compare_checkpoints(const ActivationDump& a, const ActivationDump& b,
                                          const SvccaOptions& options) {
  std::map<std::string, const ActivationMatrix*> lhs, rhs;
  for (const auto& m : a)
    if (!lhs.emplace(m.layer_name, &m).second)
      throw LayerSetMismatch("layer '" + m.layer_name + "' appears twice in the first dump");
  for (const auto& m : b)
    if (!rhs.emplace(m.layer_name, &m).second)
      throw LayerSetMismatch("layer '" + m.layer_name + "' appears twice in the second dump");
  for (const auto& [name, _] : lhs)
    if (!rhs.contains(name)) throw LayerSetMismatch("layer '" + name + "' missing from second dump");
  for (const auto& [name, _] : rhs)
    if (!lhs.contains(name)) throw LayerSetMismatch("layer '" + name + "' missing from first dump");

  std::vector<std::string> names;
  for (const auto& [name, _] : lhs) names.push_back(name);
  std::sort(names.begin(), names.end(),
            [](const std::string& l, const std::string& r) { return layer_rank(l) < layer_rank(r); });

  LayerSimilarityReport report;
  report.reserve(names.size());
  for (const auto& name : names)
    report.emplace_back(name, svcca_similarity(*lhs[name], *rhs[name], options.variance_threshold,
                                               options.ridge));
  return report;
}

GroupSummary group_summary(const LayerSimilarityReport& report) {
  double sums[3] = {0, 0, 0};
  int counts[3] = {0, 0, 0};
  for (const auto& [name, value] : report) {
    const int g = static_cast<int>(layer_group(name));
    sums[g] += value;
    ++counts[g];
  }
  auto avg = [&](int g) {
    return counts[g] ? sums[g] / counts[g] : std::numeric_limits<double>::quiet_NaN();
  };
  return {avg(0), avg(1), avg(2)};
}

}  // namespace gi::svcca
