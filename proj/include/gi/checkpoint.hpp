// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// GICK container: magic "GICK", u32 version, u64 config fingerprint, u64
// iteration, u64 seed, u32 q/base/repeat/domains, f64 init_std, generator and
// discriminator parameter blocks in layer order, both Adam states, the
// sampler rng state, trailing CRC32. Integers and doubles are little-endian.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gi/network.hpp"
#include "gi/optimizer.hpp"

namespace gi::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NetworkCheckpoint {
  std::uint64_t iteration = 0;
  GeneratorConfig config;
  std::vector<Parameter> generator;
  std::vector<Parameter> discriminator;
  optim::AdamState adam_g;
  optim::AdamState adam_d;
  std::string rng_state;

  std::uint64_t fingerprint() const { return config.fingerprint(); }
};

/// Values, names and frozen flags compare; gradients are ignored.
bool bit_equal(const NetworkCheckpoint& a, const NetworkCheckpoint& b);

NetworkCheckpoint capture(const Generator& g, const Discriminator& d, std::uint64_t iteration,
                          const optim::AdamState& adam_g = {},
                          const optim::AdamState& adam_d = {}, const std::string& rng_state = {});

/// Copies parameter values into networks of the same geometry. Throws
/// ConfigError on a fingerprint mismatch, FormatError on a name or shape
/// mismatch.
void restore(const NetworkCheckpoint& c, Generator& g, Discriminator& d);
Generator restore_generator(const NetworkCheckpoint& c);

std::string encode_checkpoint(const NetworkCheckpoint& c);
NetworkCheckpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const NetworkCheckpoint& c, const std::string& path);
NetworkCheckpoint load_checkpoint(const std::string& path);

}  // namespace gi::model
