// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <random>
#include <string>

#include "gi/network.hpp"
#include "gi/tensor.hpp"

namespace gi::testing {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = n(rng);
  return t;
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

/// Small geometry that keeps finite-difference sweeps over every parameter cheap.
inline model::GeneratorConfig tiny_config(std::uint64_t seed = 0, int repeat = 2) {
  model::GeneratorConfig c;
  c.q_features = 8;
  c.base_channels = 1;
  c.repeat_blocks = repeat;
  c.n_domains = 2;
  c.seed = seed;
  return c;
}

/// Replaces every parameter with N(0, scale) so no gradient is trivially tiny.
inline void randomize(model::ParameterStore& store, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  for (std::size_t i = 0; i < store.size(); ++i)
    for (double& v : store[i].value.data()) v = n(rng);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gi_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace gi::testing
