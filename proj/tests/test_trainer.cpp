// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "gi/checkpoint.hpp"
#include "gi/errors.hpp"
#include "gi/optimizer.hpp"
#include "gi/trainer.hpp"
#include "helpers.hpp"

using namespace gi;
using namespace gi::train;

namespace {

data::Dataset small_dataset(int domains, int q = 8, std::uint64_t seed = 3) {
  data::SynthOptions o;
  o.n_domains = domains;
  o.sentences_per_domain = 3;
  o.q = q;
  o.t_min = 20;
  o.t_max = 40;
  o.seed = seed;
  auto r = data::synth_dataset(o);
  return data::normalize_per_domain(r.dataset, r.stats);
}

TrainConfig small_config(std::uint64_t total = 20) {
  TrainConfig c;
  c.model = gi::testing::tiny_config(0);
  c.total_iterations = total;
  c.checkpoint_every = 10;
  c.batch_size = 2;
  c.crop_frames = 16;
  c.lr_g = c.lr_d = 1e-3;
  c.weights.id_cutoff_iterations = 5;
  return c;
}

bool same_log(const TrainLog& a, const TrainLog& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.iteration != y.iteration || x.adv_g != y.adv_g || x.adv_d != y.adv_d || x.cyc != y.cyc ||
        x.id != y.id || x.total_g != y.total_g || x.total_d != y.total_d ||
        x.layer_grad_norms != y.layer_grad_norms)
      return false;
  }
  return true;
}

bool same_params(const std::vector<Parameter>& a, const std::vector<Parameter>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || a[i].value != b[i].value) return false;
  return true;
}

}  // namespace

TEST_CASE("adam first step and zero gradient") {
  optim::AdamHyper h;
  std::vector<double> theta = {0.0, 2.0}, grad = {1.0, -3.0}, m(2, 0.0), v(2, 0.0);
  optim::adam_step(theta, grad, m, v, 1, h);
  CHECK(std::abs(theta[0] - (-1e-4 / (1.0 + 1e-8))) <= 1e-15);
  CHECK(std::abs(theta[1] - (2.0 + 1e-4 * 3.0 / (3.0 + 1e-8))) <= 1e-15);

  std::vector<double> before = theta, m0 = m, v0 = v, zero(2, 0.0);
  optim::adam_step(theta, zero, m, v, 2, h);
  for (int i = 0; i < 2; ++i) {
    CHECK(m[i] == doctest::Approx(m0[i] * h.beta1).epsilon(1e-15));
    CHECK(v[i] == doctest::Approx(v0[i] * h.beta2).epsilon(1e-15));
  }
  // moments are nonzero so theta still moves along the old direction
  CHECK(theta[0] < before[0]);

  std::vector<double> t2 = {1.0}, g2 = {0.0}, m2 = {0.0}, v2 = {0.0};
  optim::adam_step(t2, g2, m2, v2, 1, h);
  CHECK(t2[0] == 1.0);

  std::vector<double> nan = {std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(optim::adam_step(t2, nan, m2, v2, 2, h), DivergenceError);
}

TEST_CASE("adam update leaves everything untouched on a NaN gradient") {
  model::Generator g(gi::testing::tiny_config());
  auto& store = g.parameters();
  auto state = optim::zero_state(store);
  const auto before = model::capture(g, model::Discriminator(g.config()), 0, state);
  for (std::size_t i = 0; i < store.size(); ++i) store[i].grad.fill(0.1);
  store[store.size() - 1].grad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(optim::adam_update(store, state, {}), DivergenceError);
  CHECK(state.step == 0);
  for (std::size_t i = 0; i < store.size(); ++i) CHECK(store[i].value == before.generator[i].value);
}

TEST_CASE("sample_batch covers all ordered pairs uniformly") {
  const auto ds = small_dataset(4);
  std::mt19937_64 rng(11);
  std::map<std::pair<int, int>, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws / 50; ++i) {
    const Batch b = sample_batch(ds, rng, 50, 16);
    for (int k = 0; k < 50; ++k) {
      CHECK(b.source[k] != b.target[k]);
      ++counts[{b.source[k], b.target[k]}];
    }
  }
  REQUIRE(counts.size() == 12);
  const double p = 1.0 / 12.0;
  const double sigma = std::sqrt(p * (1 - p) / draws);
  for (const auto& [pair, n] : counts) {
    CAPTURE(pair.first);
    CAPTURE(pair.second);
    CHECK(std::abs(n / double(draws) - p) <= 3 * sigma);
  }
}

TEST_CASE("sample_batch crops, wraps and is seeded") {
  data::Dataset ds;
  ds.n_domains = 2;
  std::mt19937_64 fill(1);
  for (int d = 0; d < 2; ++d) {
    FeatureSequence s;
    s.features = gi::testing::random_matrix(4, d == 0 ? 16 : 10, fill);
    s.domain = DomainCode{d};
    s.id = "s" + std::to_string(d);
    ds.sequences.push_back(s);
  }
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Batch b = sample_batch(ds, rng, 4, 16);
    REQUIRE(b.x.shape() == Shape{4, 1, 4, 16});
    for (int k = 0; k < 4; ++k) {
      const auto& f = ds.sequences[b.source[k]].features;
      const double* x = b.x.data().data() + k * 64;
      if (b.source[k] == 0) {
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 16; ++c) CHECK(x[r * 16 + c] == f(r, c));
      } else {
        int offset = -1;
        for (int o = 0; o < 10; ++o)
          if (x[0] == f(0, o)) offset = o;
        REQUIRE(offset >= 0);
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 16; ++c) CHECK(x[r * 16 + c] == f(r, (offset + c) % 10));
      }
    }
  }

  std::mt19937_64 a(9), b(9);
  for (int i = 0; i < 5; ++i) {
    const Batch x = sample_batch(ds, a, 3, 8), y = sample_batch(ds, b, 3, 8);
    CHECK(x.x == y.x);
    CHECK(x.source == y.source);
    CHECK(x.target == y.target);
  }
}

TEST_CASE("train config validation") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  c.checkpoint_every = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.crop_frames = 18;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.lr_g = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("zero iterations returns the initialization") {
  const auto ds = small_dataset(2);
  auto c = small_config(0);
  const auto r = train::train(c, ds);
  REQUIRE(r.checkpoints.size() == 1);
  model::Generator g(c.model);
  model::Discriminator d(c.model);
  const auto init = model::capture(g, d, 0);
  CHECK(same_params(r.final_checkpoint().generator, init.generator));
  CHECK(same_params(r.final_checkpoint().discriminator, init.discriminator));
  CHECK(r.log.records.empty());
}

TEST_CASE("training is deterministic and logs the schedule") {
  const auto ds = small_dataset(2);
  const auto c = small_config(20);
  const auto a = train::train(c, ds);
  const auto b = train::train(c, ds);
  REQUIRE(a.log.records.size() == 20);
  CHECK(same_log(a.log, b.log));
  REQUIRE(a.checkpoints.size() == 3);
  CHECK(a.checkpoints[1].iteration == 10);
  for (std::size_t k = 0; k < a.checkpoints.size(); ++k)
    CHECK(model::encode_checkpoint(a.checkpoints[k]) == model::encode_checkpoint(b.checkpoints[k]));

  for (const auto& r : a.log.records) {
    CHECK(std::isfinite(r.total_g));
    CHECK(r.layer_grad_norms.size() == 10);
    if (r.iteration >= c.weights.id_cutoff_iterations) {
      CHECK(r.id == 0.0);
      CHECK(r.total_g == doctest::Approx(r.adv_g + c.weights.lambda_cyc * r.cyc).epsilon(1e-14));
    } else {
      CHECK(r.id > 0.0);
      CHECK(r.total_g == doctest::Approx(r.adv_g + 10 * r.cyc + 5 * r.id).epsilon(1e-14));
    }
    CHECK(r.total_d == r.adv_d);
  }
}

TEST_CASE("split and resumed training equals the uninterrupted run") {
  const auto ds = small_dataset(2);
  const auto full = train::train(small_config(20), ds);

  const auto half = train::train(small_config(10), ds);
  const auto reloaded = model::decode_checkpoint(model::encode_checkpoint(half.final_checkpoint()));
  Trainer t(small_config(20), ds, reloaded);
  CHECK(t.iteration() == 10);
  const auto rest = run(t, small_config(20));
  CHECK(model::encode_checkpoint(rest.final_checkpoint()) ==
        model::encode_checkpoint(full.final_checkpoint()));
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(rest.log.records[i].total_g == full.log.records[10 + i].total_g);
    CHECK(rest.log.records[i].total_d == full.log.records[10 + i].total_d);
  }
}

TEST_CASE("frozen layers stay bit-identical while others move") {
  const auto ds = small_dataset(2);
  auto c = small_config(20);
  c.frozen_layers = {"R1", "D2"};
  const auto r = train::train(c, ds);
  const auto& init = r.checkpoints.front();
  model::Generator ref(c.model);
  for (const auto& ck : r.checkpoints)
    for (std::size_t i = 0; i < ck.generator.size(); ++i) {
      const auto& layer = ref.parameters().layer_of(i);
      if (c.frozen_layers.contains(layer)) {
        CHECK(ck.generator[i].value == init.generator[i].value);
        CHECK(ck.generator[i].frozen);
      } else if (ck.iteration >= 10) {
        CHECK(ck.generator[i].value != init.generator[i].value);
      }
    }
  c.frozen_layers = {"R7"};
  CHECK_THROWS_AS(train::train(c, ds), ConfigError);
}

TEST_CASE("transfer keeps parameters and resets optimizer moments") {
  const auto ds = small_dataset(2);
  const auto base = train::train(small_config(10), ds);
  const auto& src = base.final_checkpoint();
  CHECK(src.adam_g.step == 10);
  auto t = Trainer::transfer(small_config(10), small_dataset(2, 8, 99), src);
  const auto ck = t.checkpoint();
  CHECK(ck.iteration == 0);
  CHECK(ck.adam_g.step == 0);
  CHECK(ck.adam_d.step == 0);
  CHECK(same_params(ck.generator, src.generator));
  CHECK(same_params(ck.discriminator, src.discriminator));

  auto other = small_config(10);
  other.model.base_channels = 2;
  CHECK_THROWS_AS(Trainer::transfer(other, ds, src), ConfigError);
}

TEST_CASE("divergence halts the run and is flagged") {
  const auto ds = small_dataset(2);
  auto c = small_config(20);
  auto start = train::train(small_config(0), ds).final_checkpoint();
  start.generator[0].value[0] = std::numeric_limits<double>::quiet_NaN();
  Trainer t(c, ds, start);
  const auto r = run(t, c);
  CHECK(r.diverged);
  CHECK(r.log.diverged);
  CHECK_FALSE(r.log.divergence_message.empty());
  CHECK(r.log.records.empty());
}

TEST_CASE("optimal checkpoint uses the windowed mean of total_g") {
  const auto ds = small_dataset(2);
  const auto r = train::train(small_config(20), ds);
  CHECK(r.optimal_index(OptimalRule::Final, 10) == 2);
  const double m1 = r.log.mean_total_g(0, 10), m2 = r.log.mean_total_g(10, 20);
  CHECK(r.optimal_index(OptimalRule::LowestTotalG, 10) == (m1 < m2 ? 1u : 2u));
}

TEST_CASE("record_activations shapes and determinism") {
  const auto ds = small_dataset(2);
  const auto r = train::train(small_config(10), ds);
  const auto probe = make_probe(ds, 6, 16);
  REQUIRE(probe.sequences.size() == 6);
  CHECK(probe.targets == std::vector<int>{1, 0, 1, 0, 1, 0});

  const std::set<std::string> layers = {"R2", "D1", "R1", "Out"};
  const auto a = record_activations(r.checkpoints[0], probe, layers);
  const auto b = record_activations(r.checkpoints[0], probe, layers);
  REQUIRE(a.size() == 4);
  CHECK(a[0].layer_name == "D1");
  CHECK(a[1].layer_name == "R1");
  CHECK(a[3].layer_name == "Out");
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);

  // base 1: R blocks carry 4 channels over T/4 positions
  CHECK(a[1].data.rows() == 4);
  CHECK(a[1].data.cols() == 6 * 4);
  CHECK(a[0].data.rows() == 1);
  CHECK(a[0].data.cols() == 6 * 8 * 16);

  const auto later = record_activations(r.final_checkpoint(), probe, layers);
  CHECK(later[1].checkpoint_iteration == 10);
  const auto report = svcca::compare_checkpoints(a, later);
  CHECK(report.size() == 4);
  for (const auto& [name, v] : report) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS_AS(record_activations(r.checkpoints[0], probe, {"R9"}), LayerSetMismatch);
}
