// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/network.hpp"

#include <random>

#include "gi/errors.hpp"
#include "gi/ops.hpp"

namespace gi::model {

namespace {

constexpr std::uint64_t kDiscriminatorSeedSalt = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class Initializer {
 public:
  Initializer(std::uint64_t seed, double std) : rng_(seed), normal_(0.0, std) {}

  Tensor normal(Shape shape, double mean = 0.0) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = mean + normal_(rng_);
    return t;
  }
  static Tensor constant(Shape shape, double v) { return Tensor(std::move(shape), v); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

void check_codes(std::span<const int> codes, int n_domains, std::size_t batch, const char* what) {
  if (codes.size() != batch)
    throw ShapeError(std::string(what) + ": " + std::to_string(codes.size()) +
                     " codes for a batch of " + std::to_string(batch));
  for (int c : codes)
    if (c < 0 || c >= n_domains)
      throw UnknownDomain(std::string(what) + ": domain " + std::to_string(c) + " outside [0, " +
                          std::to_string(n_domains) + ")");
}

void check_input(const ad::Var& x, int q, const char* what) {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] != 1 || s[2] != q)
    throw ShapeError(std::string(what) + ": expected (N, 1, " + std::to_string(q) +
                     ", T) input, got " + to_string(s));
}

}  // namespace

void GeneratorConfig::validate() const {
  if (q_features < 4 || q_features % 4 != 0)
    throw ConfigError("q_features must be a positive multiple of 4, got " +
                      std::to_string(q_features));
  if (base_channels < 1) throw ConfigError("base_channels must be >= 1");
  if (repeat_blocks < 1) throw ConfigError("repeat_blocks must be >= 1");
  if (n_domains < 2) throw ConfigError("n_domains must be >= 2");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
}

std::uint64_t GeneratorConfig::fingerprint() const {
  return fnv1a("gi-generator;q=" + std::to_string(q_features) +
               ";base=" + std::to_string(base_channels) +
               ";repeat=" + std::to_string(repeat_blocks) +
               ";domains=" + std::to_string(n_domains));
}

Parameter& ParameterStore::add(const std::string& layer, const std::string& name, Tensor value) {
  const std::string full = layer + "." + name;
  if (by_name_.contains(full)) throw ContractViolation("duplicate parameter " + full);
  by_name_[full] = params_.size();
  layers_.push_back(layer);
  return params_.emplace_back(full, std::move(value));
}

Parameter& ParameterStore::at(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw UnknownLayer("no parameter named " + name);
  return params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw UnknownLayer("no parameter named " + name);
  return params_[it->second];
}

std::vector<std::size_t> ParameterStore::indices_of_layer(const std::string& layer) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i] == layer) out.push_back(i);
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) {
    if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
    p.zero_grad();
  }
}

std::size_t ParameterStore::value_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<std::string> generator_layer_names(int repeat_blocks) {
  std::vector<std::string> names = {"D1", "D2", "D3", "DC"};
  for (int i = 1; i <= repeat_blocks; ++i) names.push_back("R" + std::to_string(i));
  for (const char* n : {"UC", "U1", "U2", "Out"}) names.emplace_back(n);
  return names;
}

Generator::Generator(const GeneratorConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  layers_ = generator_layer_names(cfg_.repeat_blocks);
  const int b = cfg_.base_channels;
  const int q4 = cfg_.q_features / 4;
  const int nd = cfg_.n_domains;
  Initializer init(cfg_.seed, cfg_.init_std);

  params_.add("D1", "weight", init.normal({2 * b, 1, 3, 9}));
  params_.add("D1", "bias", Initializer::constant({2 * b}, 0.0));
  params_.add("D2", "weight", init.normal({4 * b, b, 4, 8}));
  params_.add("D2", "gamma", Initializer::constant({4 * b}, 1.0));
  params_.add("D2", "beta", Initializer::constant({4 * b}, 0.0));
  params_.add("D3", "weight", init.normal({8 * b, 2 * b, 4, 8}));
  params_.add("D3", "gamma", Initializer::constant({8 * b}, 1.0));
  params_.add("D3", "beta", Initializer::constant({8 * b}, 0.0));
  params_.add("DC", "weight", init.normal({4 * b, 4 * b * q4, 1}));
  params_.add("DC", "gamma", Initializer::constant({4 * b}, 1.0));
  params_.add("DC", "beta", Initializer::constant({4 * b}, 0.0));
  for (int i = 1; i <= cfg_.repeat_blocks; ++i) {
    const std::string layer = "R" + std::to_string(i);
    params_.add(layer, "weight", init.normal({8 * b, 4 * b, 5}));
    // Distinct per-domain perturbations so each target code acts differently
    // from the first step.
    params_.add(layer, "cin_gamma", init.normal({nd, 8 * b}, 1.0));
    params_.add(layer, "cin_beta", init.normal({nd, 8 * b}, 0.0));
  }
  params_.add("UC", "weight", init.normal({4 * b * q4, 4 * b, 1}));
  params_.add("UC", "gamma", Initializer::constant({4 * b * q4}, 1.0));
  params_.add("UC", "beta", Initializer::constant({4 * b * q4}, 0.0));
  params_.add("U1", "weight", init.normal({4 * b, 4 * b, 4, 8}));
  params_.add("U1", "gamma", Initializer::constant({4 * b}, 1.0));
  params_.add("U1", "beta", Initializer::constant({4 * b}, 0.0));
  params_.add("U2", "weight", init.normal({2 * b, 2 * b, 4, 8}));
  params_.add("U2", "gamma", Initializer::constant({2 * b}, 1.0));
  params_.add("U2", "beta", Initializer::constant({2 * b}, 0.0));
  params_.add("Out", "weight", init.normal({1, b, 3, 9}));
  params_.add("Out", "bias", Initializer::constant({1}, 0.0));
}

template <typename ParamFn>
ad::Var Generator::run(ad::Graph& g, ad::Var x, std::span<const int> targets,
                       const std::set<std::string>& tap, Taps* taps, ParamFn&& param) const {
  (void)g;
  check_input(x, cfg_.q_features, "generator");
  const int frames = x.shape()[3];
  if (frames < 4 || frames % 4 != 0)
    throw ShapeError("generator: frame count " + std::to_string(frames) +
                     " must be >= 4 and divisible by 4");
  check_codes(targets, cfg_.n_domains, static_cast<std::size_t>(x.shape()[0]), "generator");

  const int q4 = cfg_.q_features / 4;
  auto record = [&](const std::string& name, ad::Var v) {
    if (taps && tap.contains(name)) (*taps)[name] = v;
    return v;
  };
  using ad::Window;

  ad::Var h = ad::conv2d(x, param("D1.weight"), param("D1.bias"), Window{1, 1}, Window{1, 4});
  h = record("D1", ad::glu(h));
  for (const char* layer : {"D2", "D3"}) {
    const std::string l = layer;
    h = ad::conv2d(h, param(l + ".weight"), std::nullopt, Window{2, 2}, Window{1, 3});
    h = ad::instance_norm(h, param(l + ".gamma"), param(l + ".beta"));
    h = record(l, ad::glu(h));
  }
  h = ad::reshape_2d_to_1d(h);
  h = ad::conv1d(h, param("DC.weight"), std::nullopt, 1, 0);
  h = record("DC", ad::instance_norm(h, param("DC.gamma"), param("DC.beta")));
  for (int i = 1; i <= cfg_.repeat_blocks; ++i) {
    const std::string l = "R" + std::to_string(i);
    h = ad::conv1d(h, param(l + ".weight"), std::nullopt, 1, 2);
    h = ad::cond_instance_norm(h, targets, param(l + ".cin_gamma"), param(l + ".cin_beta"));
    h = record(l, ad::glu(h));
  }
  h = ad::conv1d(h, param("UC.weight"), std::nullopt, 1, 0);
  h = ad::instance_norm(h, param("UC.gamma"), param("UC.beta"));
  h = record("UC", ad::reshape_1d_to_2d(h, q4));
  for (const char* layer : {"U1", "U2"}) {
    const std::string l = layer;
    h = ad::conv_transpose2d(h, param(l + ".weight"), std::nullopt, Window{2, 2}, Window{1, 3});
    h = ad::instance_norm(h, param(l + ".gamma"), param(l + ".beta"));
    h = record(l, ad::glu(h));
  }
  h = ad::conv2d(h, param("Out.weight"), param("Out.bias"), Window{1, 1}, Window{1, 4});
  return record("Out", h);
}

ad::Var Generator::forward(ad::Graph& g, ad::Var x, std::span<const int> targets,
                           const std::set<std::string>& tap, Taps* taps) {
  return run(g, x, targets, tap, taps,
             [&](const std::string& name) { return g.param(params_.at(name)); });
}

ad::Var Generator::evaluate(ad::Graph& g, ad::Var x, std::span<const int> targets,
                            const std::set<std::string>& tap, Taps* taps) const {
  return run(g, x, targets, tap, taps,
             [&](const std::string& name) { return g.param_constant(params_.at(name)); });
}

void Generator::freeze(const std::set<std::string>& layers) {
  for (const auto& name : layers)
    if (std::find(layers_.begin(), layers_.end(), name) == layers_.end())
      throw UnknownLayer("cannot freeze unknown layer '" + name + "'");
  for (const auto& name : layers)
    for (std::size_t i : params_.indices_of_layer(name)) params_[i].frozen = true;
}

std::set<std::string> Generator::frozen_layers() const {
  std::set<std::string> out;
  for (const auto& name : layers_) {
    const auto idx = params_.indices_of_layer(name);
    if (!idx.empty() &&
        std::all_of(idx.begin(), idx.end(), [&](std::size_t i) { return params_[i].frozen; }))
      out.insert(name);
  }
  return out;
}

Discriminator::Discriminator(const GeneratorConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int b = cfg_.base_channels;
  const int nd = cfg_.n_domains;
  Initializer init(cfg_.seed ^ kDiscriminatorSeedSalt, cfg_.init_std);
  params_.add("B1", "weight", init.normal({2 * b, 1, 3, 9}));
  params_.add("B1", "bias", Initializer::constant({2 * b}, 0.0));
  params_.add("B2", "weight", init.normal({4 * b, b, 3, 3}));
  params_.add("B2", "bias", Initializer::constant({4 * b}, 0.0));
  params_.add("B3", "weight", init.normal({8 * b, 2 * b, 3, 3}));
  params_.add("B3", "bias", Initializer::constant({8 * b}, 0.0));
  params_.add("B4", "weight", init.normal({8 * b, 4 * b, 3, 3}));
  params_.add("B4", "bias", Initializer::constant({8 * b}, 0.0));
  params_.add("FC", "weight", init.normal({1, 4 * b}));
  params_.add("FC", "bias", Initializer::constant({1}, 0.0));
  params_.add("Proj", "embedding", init.normal({nd * nd, 4 * b}));
}

template <typename ParamFn>
ad::Var Discriminator::run(ad::Graph& g, ad::Var x, std::span<const int> first,
                           std::span<const int> second, ParamFn&& param) const {
  (void)g;
  check_input(x, cfg_.q_features, "discriminator");
  const std::size_t batch = static_cast<std::size_t>(x.shape()[0]);
  check_codes(first, cfg_.n_domains, batch, "discriminator");
  check_codes(second, cfg_.n_domains, batch, "discriminator");
  using ad::Window;

  ad::Var h = ad::glu(ad::conv2d(x, param("B1.weight"), param("B1.bias"), Window{1, 1},
                                 Window{1, 4}));
  for (const char* layer : {"B2", "B3", "B4"}) {
    const std::string l = layer;
    h = ad::glu(ad::conv2d(h, param(l + ".weight"), param(l + ".bias"), Window{2, 2},
                           Window{1, 1}));
  }
  const ad::Var pooled = ad::global_sum_pool(h);
  std::vector<int> rows(batch);
  for (std::size_t n = 0; n < batch; ++n) rows[n] = first[n] * cfg_.n_domains + second[n];
  const ad::Var head = ad::fully_connected(pooled, param("FC.weight"), param("FC.bias"));
  return ad::add(head, ad::pair_projection(pooled, param("Proj.embedding"), rows));
}

ad::Var Discriminator::forward(ad::Graph& g, ad::Var x, std::span<const int> first,
                               std::span<const int> second) {
  return run(g, x, first, second,
             [&](const std::string& name) { return g.param(params_.at(name)); });
}

ad::Var Discriminator::evaluate(ad::Graph& g, ad::Var x, std::span<const int> first,
                                std::span<const int> second) const {
  return run(g, x, first, second,
             [&](const std::string& name) { return g.param_constant(params_.at(name)); });
}

svcca::ActivationMatrix to_activation_matrix(const Tensor& t, const std::string& layer,
                                             std::uint64_t iteration) {
  if (t.rank() < 3)
    throw ShapeError("activation tensor needs spatial axes, got " + to_string(t.shape()));
  const int batch = t.dim(0), channels = t.dim(1);
  const std::size_t spatial = t.size() / (static_cast<std::size_t>(batch) * channels);
  svcca::ActivationMatrix m;
  m.layer_name = layer;
  m.checkpoint_iteration = iteration;
  m.data.resize(channels, static_cast<Eigen::Index>(batch * spatial));
  for (int n = 0; n < batch; ++n)
    for (int c = 0; c < channels; ++c) {
      const std::size_t off = (static_cast<std::size_t>(n) * channels + c) * spatial;
      for (std::size_t s = 0; s < spatial; ++s)
        m.data(c, static_cast<Eigen::Index>(n * spatial + s)) = t[off + s];
    }
  return m;
}

Tensor batch_tensor(std::span<const FeatureSequence> items) {
  if (items.empty()) throw ShapeError("empty batch");
  const int q = items[0].q(), frames = items[0].frames();
  Tensor t({static_cast<int>(items.size()), 1, q, frames});
  for (std::size_t n = 0; n < items.size(); ++n) {
    if (items[n].q() != q || items[n].frames() != frames)
      throw ShapeError("batch items differ in size");
    const std::size_t off = n * static_cast<std::size_t>(q) * frames;
    for (int r = 0; r < q; ++r)
      for (int c = 0; c < frames; ++c)
        t[off + static_cast<std::size_t>(r) * frames + c] = items[n].features(r, c);
  }
  return t;
}

Conversion convert(const Generator& gen, const FeatureSequence& x, DomainCode target,
                   const std::set<std::string>& tap) {
  ad::Graph g;
  const ad::Var in = g.constant(batch_tensor(std::span(&x, 1)));
  const int code = target.index;
  Taps taps;
  const ad::Var out = gen.evaluate(g, in, std::span(&code, 1), tap, &taps);

  Conversion c;
  c.converted.domain = target;
  c.converted.id = x.id + "->" + std::to_string(target.index);
  c.converted.features.resize(x.q(), x.frames());
  for (int r = 0; r < x.q(); ++r)
    for (int t = 0; t < x.frames(); ++t)
      c.converted.features(r, t) = out.value()[static_cast<std::size_t>(r) * x.frames() + t];
  for (const auto& name : gen.layer_names())
    if (auto it = taps.find(name); it != taps.end())
      c.activations.push_back(to_activation_matrix(it->second.value(), name));
  return c;
}

double discriminate(const Discriminator& d, const FeatureSequence& x, DomainCode source,
                    DomainCode target) {
  ad::Graph g;
  const ad::Var in = g.constant(batch_tensor(std::span(&x, 1)));
  const int s = source.index, t = target.index;
  return d.evaluate(g, in, std::span(&s, 1), std::span(&t, 1)).value()[0];
}

}  // namespace gi::model
