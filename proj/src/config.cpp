// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gi/errors.hpp"

namespace gi::config {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("'" + name_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T v{};
    read(key, v);
    out = v;
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.contains(key)) throw ConfigError("unknown key '" + name_ + "." + key + "'");
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <typename Enum>
Enum parse_enum(const std::string& text, std::initializer_list<std::pair<const char*, Enum>> map,
                const char* key) {
  for (const auto& [name, value] : map)
    if (text == name) return value;
  throw ConfigError(std::string("unknown value '") + text + "' for " + key);
}

}  // namespace

std::vector<FrozenVariant> standard_variants() {
  return {{"A", {"R2", "R3"}}, {"B", {"R4", "R5"}}, {"C", {"R6", "R7", "R8"}}};
}

void ExperimentConfig::validate() const {
  train.validate();
  data::SynthOptions synth{train.model.n_domains, data.sentences_per_domain,
                           train.model.q_features, data.t_min, data.t_max, data.seed};
  synth.validate();
  if (probe.sequences < 1) throw ConfigError("probe.sequences must be >= 1");
  if (probe.frames < 4 || probe.frames % 4 != 0)
    throw ConfigError("probe.frames must be a positive multiple of 4");
  if (!(svcca.variance_threshold > 0.0 && svcca.variance_threshold <= 1.0))
    throw ConfigError("svcca.variance_threshold must lie in (0, 1]");
  if (!(svcca.ridge >= 0.0)) throw ConfigError("svcca.ridge must be non-negative");
  if (seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
  for (int d : depths)
    if (d < 1 || d % 2 == 0) throw ConfigError("depths must be odd integers >= 1");
  if (!(transfer_fraction > 0.0 && transfer_fraction <= 1.0))
    throw ConfigError("transfer_fraction must lie in (0, 1]");
}

ExperimentConfig ExperimentConfig::with_seed(std::uint64_t seed) const {
  ExperimentConfig c = *this;
  c.train.seed = seed;
  c.train.model.seed = seed;
  return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section top(root, "config");

  std::uint64_t seed = 0;
  top.read("seed", seed);
  c.train.seed = seed;
  c.train.model.seed = seed;

  if (top.has("model")) {
    Section s(top.raw("model"), "model");
    s.read("q_features", c.train.model.q_features);
    s.read("base_channels", c.train.model.base_channels);
    s.read("repeat_blocks", c.train.model.repeat_blocks);
    s.read("n_domains", c.train.model.n_domains);
    s.read("init_std", c.train.model.init_std);
    s.read("seed", c.train.model.seed);
    s.finish();
  }

  bool cutoff_given = false;
  if (top.has("train")) {
    Section s(top.raw("train"), "train");
    auto& t = c.train;
    s.read("total_iterations", t.total_iterations);
    s.read("checkpoint_every", t.checkpoint_every);
    s.read("batch_size", t.batch_size);
    s.read("crop_frames", t.crop_frames);
    s.read("lr_g", t.lr_g);
    s.read("lr_d", t.lr_d);
    s.read("beta1", t.beta1);
    s.read("beta2", t.beta2);
    s.read("adam_eps", t.adam_eps);
    s.read("lambda_cyc", t.weights.lambda_cyc);
    s.read("lambda_id", t.weights.lambda_id);
    cutoff_given = s.has("id_cutoff_iterations");
    s.read("id_cutoff_iterations", t.weights.id_cutoff_iterations);
    s.read("seed", t.seed);
    std::string adversarial = "least_squares", optimal = "lowest_total_g";
    s.read("adversarial", adversarial);
    s.read("optimal", optimal);
    t.adversarial = parse_enum<objectives::AdversarialForm>(
        adversarial,
        {{"least_squares", objectives::AdversarialForm::LeastSquares},
         {"log", objectives::AdversarialForm::Log}},
        "train.adversarial");
    t.optimal = parse_enum<train::OptimalRule>(
        optimal, {{"lowest_total_g", train::OptimalRule::LowestTotalG},
                  {"final", train::OptimalRule::Final}},
        "train.optimal");
    std::vector<std::string> frozen;
    s.read("frozen_layers", frozen);
    t.frozen_layers = {frozen.begin(), frozen.end()};
    s.read_optional("init_from", t.init_from);
    s.finish();
  }
  if (!cutoff_given) c.train.weights.id_cutoff_iterations = c.train.total_iterations / 20;

  if (top.has("data")) {
    Section s(top.raw("data"), "data");
    s.read("sentences_per_domain", c.data.sentences_per_domain);
    s.read("t_min", c.data.t_min);
    s.read("t_max", c.data.t_max);
    s.read("seed", c.data.seed);
    s.read("transfer_seed", c.data.transfer_seed);
    s.finish();
  }

  if (top.has("probe")) {
    Section s(top.raw("probe"), "probe");
    s.read("sequences", c.probe.sequences);
    s.read("frames", c.probe.frames);
    s.finish();
  }

  if (top.has("svcca")) {
    Section s(top.raw("svcca"), "svcca");
    s.read("variance_threshold", c.svcca.variance_threshold);
    s.read("ridge", c.svcca.ridge);
    s.finish();
  }

  if (top.has("experiment")) {
    Section s(top.raw("experiment"), "experiment");
    s.read("seeds", c.seeds);
    s.read("depths", c.depths);
    s.read("transfer_fraction", c.transfer_fraction);
    s.read_optional("base_checkpoint", c.base_checkpoint);
    if (s.has("variants")) {
      std::map<std::string, std::vector<std::string>> variants;
      s.read("variants", variants);
      c.variants.clear();
      for (auto& [name, layers] : variants) c.variants.push_back({name, {layers.begin(), layers.end()}});
    }
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace gi::config
