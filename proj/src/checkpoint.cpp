// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/checkpoint.hpp"

#include "binary_io.hpp"
#include "gi/errors.hpp"

namespace gi::model {

namespace {

constexpr char kMagic[] = "GICK";

std::vector<Parameter> snapshot(const ParameterStore& store) {
  std::vector<Parameter> out;
  out.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    Parameter p(store[i].name, store[i].value);
    p.frozen = store[i].frozen;
    out.push_back(std::move(p));
  }
  return out;
}

void copy_into(const std::vector<Parameter>& src, ParameterStore& dst, const char* which) {
  if (src.size() != dst.size())
    throw FormatError(std::string(which) + ": checkpoint holds " + std::to_string(src.size()) +
                      " parameters, network has " + std::to_string(dst.size()));
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name || src[i].value.shape() != dst[i].value.shape())
      throw FormatError(std::string(which) + ": parameter " + src[i].name + " " +
                        to_string(src[i].value.shape()) + " does not match " + dst[i].name +
                        " " + to_string(dst[i].value.shape()));
    dst[i].value = src[i].value;
    dst[i].frozen = src[i].frozen;
  }
}

void put_tensor(io::ByteWriter& w, const Tensor& t) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(t.rank()));
  for (int d : t.shape()) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  w.put<std::uint64_t>(t.size());
  w.doubles(t.data().data(), t.size());
}

Tensor get_tensor(io::ByteReader& r) {
  const auto rank = r.get<std::uint32_t>();
  if (rank > 8) throw FormatError("checkpoint: implausible tensor rank");
  Shape shape(rank);
  for (auto& d : shape) d = static_cast<int>(r.get<std::uint32_t>());
  const auto count = r.get<std::uint64_t>();
  if (count != shape_size(shape)) throw FormatError("checkpoint: tensor size disagrees with shape");
  Tensor t(shape);
  r.doubles(t.data().data(), count);
  return t;
}

void put_params(io::ByteWriter& w, const std::vector<Parameter>& ps) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ps.size()));
  for (const auto& p : ps) {
    w.str(p.name);
    w.put<std::uint8_t>(p.frozen ? 1 : 0);
    put_tensor(w, p.value);
  }
}

std::vector<Parameter> get_params(io::ByteReader& r) {
  const auto n = r.get<std::uint32_t>();
  std::vector<Parameter> ps;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    const bool frozen = r.get<std::uint8_t>() != 0;
    Parameter p(std::move(name), get_tensor(r));
    p.frozen = frozen;
    ps.push_back(std::move(p));
  }
  return ps;
}

void put_adam(io::ByteWriter& w, const optim::AdamState& s) {
  w.put<std::uint64_t>(s.step);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.m.size()));
  for (std::size_t i = 0; i < s.m.size(); ++i) {
    put_tensor(w, s.m[i]);
    put_tensor(w, s.v[i]);
  }
}

optim::AdamState get_adam(io::ByteReader& r) {
  optim::AdamState s;
  s.step = r.get<std::uint64_t>();
  const auto n = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    s.m.push_back(get_tensor(r));
    s.v.push_back(get_tensor(r));
  }
  return s;
}

bool same_params(const std::vector<Parameter>& a, const std::vector<Parameter>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || a[i].frozen != b[i].frozen || !(a[i].value == b[i].value))
      return false;
  return true;
}

}  // namespace

bool bit_equal(const NetworkCheckpoint& a, const NetworkCheckpoint& b) {
  return a.iteration == b.iteration && a.fingerprint() == b.fingerprint() &&
         a.config.seed == b.config.seed && a.config.init_std == b.config.init_std &&
         same_params(a.generator, b.generator) && same_params(a.discriminator, b.discriminator) &&
         a.adam_g == b.adam_g && a.adam_d == b.adam_d && a.rng_state == b.rng_state;
}

NetworkCheckpoint capture(const Generator& g, const Discriminator& d, std::uint64_t iteration,
                          const optim::AdamState& adam_g, const optim::AdamState& adam_d,
                          const std::string& rng_state) {
  NetworkCheckpoint c;
  c.iteration = iteration;
  c.config = g.config();
  c.generator = snapshot(g.parameters());
  c.discriminator = snapshot(d.parameters());
  c.adam_g = adam_g;
  c.adam_d = adam_d;
  c.rng_state = rng_state;
  return c;
}

void restore(const NetworkCheckpoint& c, Generator& g, Discriminator& d) {
  if (c.fingerprint() != g.config().fingerprint() || c.fingerprint() != d.config().fingerprint())
    throw ConfigError("checkpoint geometry does not match the network configuration");
  copy_into(c.generator, g.parameters(), "generator");
  copy_into(c.discriminator, d.parameters(), "discriminator");
}

Generator restore_generator(const NetworkCheckpoint& c) {
  Generator g(c.config);
  copy_into(c.generator, g.parameters(), "generator");
  return g;
}

std::string encode_checkpoint(const NetworkCheckpoint& c) {
  io::ByteWriter w;
  w.magic(kMagic);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(c.fingerprint());
  w.put<std::uint64_t>(c.iteration);
  w.put<std::uint64_t>(c.config.seed);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.config.q_features));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.config.base_channels));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.config.repeat_blocks));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.config.n_domains));
  w.put<double>(c.config.init_std);
  put_params(w, c.generator);
  put_params(w, c.discriminator);
  put_adam(w, c.adam_g);
  put_adam(w, c.adam_d);
  w.str(c.rng_state);
  return w.finish();
}

NetworkCheckpoint decode_checkpoint(const std::string& bytes) {
  io::ByteReader r(bytes, kMagic, "checkpoint");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  NetworkCheckpoint c;
  const auto fingerprint = r.get<std::uint64_t>();
  c.iteration = r.get<std::uint64_t>();
  c.config.seed = r.get<std::uint64_t>();
  c.config.q_features = static_cast<int>(r.get<std::uint32_t>());
  c.config.base_channels = static_cast<int>(r.get<std::uint32_t>());
  c.config.repeat_blocks = static_cast<int>(r.get<std::uint32_t>());
  c.config.n_domains = static_cast<int>(r.get<std::uint32_t>());
  c.config.init_std = r.get<double>();
  if (fingerprint != c.config.fingerprint())
    throw FormatError("checkpoint: fingerprint does not match the stored geometry");
  c.generator = get_params(r);
  c.discriminator = get_params(r);
  c.adam_g = get_adam(r);
  c.adam_d = get_adam(r);
  c.rng_state = r.str();
  r.expect_end();
  return c;
}

void save_checkpoint(const NetworkCheckpoint& c, const std::string& path) {
  io::write_file(path, encode_checkpoint(c));
}

NetworkCheckpoint load_checkpoint(const std::string& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace gi::model
