// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gi/errors.hpp"
#include "gi/ops.hpp"

namespace gi::train {

namespace {

constexpr std::uint64_t kSamplerSeedSalt = 0xD1B54A32D192ED03ULL;

std::string rng_text(const std::mt19937_64& rng) {
  std::ostringstream ss;
  ss << rng;
  return ss.str();
}

std::mt19937_64 rng_from_text(const std::string& text) {
  std::mt19937_64 rng;
  std::istringstream ss(text);
  ss >> rng;
  if (!ss) throw FormatError("checkpoint rng state is unreadable");
  return rng;
}

optim::AdamHyper hyper(const TrainConfig& cfg, double lr) {
  return {lr, cfg.beta1, cfg.beta2, cfg.adam_eps};
}

void require_finite(double v, const char* what, std::uint64_t iteration) {
  if (!std::isfinite(v))
    throw DivergenceError(std::string(what) + " is not finite at iteration " +
                          std::to_string(iteration));
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  weights.validate();
  if (checkpoint_every == 0) throw ConfigError("checkpoint_every must be positive");
  if (total_iterations % checkpoint_every != 0)
    throw ConfigError("checkpoint_every (" + std::to_string(checkpoint_every) +
                      ") must divide total_iterations (" + std::to_string(total_iterations) + ")");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (crop_frames < 4 || crop_frames % 4 != 0)
    throw ConfigError("crop_frames must be a positive multiple of 4");
  for (double lr : {lr_g, lr_d})
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rates must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  const auto names = model::generator_layer_names(model.repeat_blocks);
  for (const auto& f : frozen_layers)
    if (std::find(names.begin(), names.end(), f) == names.end())
      throw ConfigError("frozen layer '" + f + "' is not a generator layer");
}

Batch sample_batch(const data::Dataset& dataset, std::mt19937_64& rng, int batch_size,
                   int crop_frames) {
  if (batch_size < 1 || crop_frames < 1) throw ContractViolation("empty batch requested");
  const int n = dataset.n_domains;
  if (n < 2) throw InvalidData("sampling needs at least 2 domains");
  const auto groups = dataset.by_domain();
  for (int d = 0; d < n; ++d)
    if (groups[d].empty()) throw InvalidData("domain " + std::to_string(d) + " has no sequences");
  const int q = dataset.sequences[groups[0][0]].q();

  Batch b;
  b.x = Tensor({batch_size, 1, q, crop_frames});
  std::uniform_int_distribution<int> source_dist(0, n - 1);
  std::uniform_int_distribution<int> other_dist(0, n - 2);
  for (int k = 0; k < batch_size; ++k) {
    const int c = source_dist(rng);
    int c_hat = other_dist(rng);
    if (c_hat >= c) ++c_hat;
    const auto& pool = groups[c];
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const FeatureSequence& seq = dataset.sequences[pool[pick(rng)]];
    if (seq.q() != q) throw ShapeError("dataset mixes feature sizes");
    const int frames = seq.frames();
    int offset = 0;
    if (frames >= crop_frames) offset = std::uniform_int_distribution<int>(0, frames - crop_frames)(rng);
    const std::size_t base = static_cast<std::size_t>(k) * q * crop_frames;
    for (int r = 0; r < q; ++r)
      for (int t = 0; t < crop_frames; ++t)
        b.x[base + static_cast<std::size_t>(r) * crop_frames + t] =
            seq.features(r, (offset + t) % frames);
    b.source.push_back(c);
    b.target.push_back(c_hat);
  }
  return b;
}

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "iteration,adv_g,adv_d,cyc,id,total_g,total_d,grad_norm_max\n";
  for (const auto& r : records)
    out << r.iteration << ',' << data::format_double(r.adv_g) << ','
        << data::format_double(r.adv_d) << ',' << data::format_double(r.cyc) << ','
        << data::format_double(r.id) << ',' << data::format_double(r.total_g) << ','
        << data::format_double(r.total_d) << ',' << data::format_double(r.grad_norm_max) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

double TrainLog::mean_total_g(std::size_t begin, std::size_t end) const {
  end = std::min(end, records.size());
  if (begin >= end) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += records[i].total_g;
  return s / static_cast<double>(end - begin);
}

Trainer::Trainer(const TrainConfig& cfg, const data::Dataset& dataset, int)
    : cfg_(cfg), dataset_(&dataset), g_(cfg.model), d_(cfg.model) {
  cfg_.validate();
  if (dataset.n_domains != cfg_.model.n_domains)
    throw ConfigError("dataset has " + std::to_string(dataset.n_domains) +
                      " domains, model expects " + std::to_string(cfg_.model.n_domains));
  adam_g_ = optim::zero_state(g_.parameters());
  adam_d_ = optim::zero_state(d_.parameters());
  rng_.seed(cfg_.seed ^ kSamplerSeedSalt);
  log_.layer_names = g_.layer_names();
}

Trainer::Trainer(const TrainConfig& cfg, const data::Dataset& dataset) : Trainer(cfg, dataset, 0) {
  if (cfg_.init_from) {
    const auto init = model::load_checkpoint(*cfg_.init_from);
    model::restore(init, g_, d_);
  }
  apply_freeze();
}

Trainer::Trainer(const TrainConfig& cfg, const data::Dataset& dataset,
                 const model::NetworkCheckpoint& resume)
    : Trainer(cfg, dataset, 0) {
  model::restore(resume, g_, d_);
  if (resume.adam_g.m.size() != g_.parameters().size() ||
      resume.adam_d.m.size() != d_.parameters().size())
    throw FormatError("checkpoint lacks optimizer state for a resume");
  adam_g_ = resume.adam_g;
  adam_d_ = resume.adam_d;
  rng_ = rng_from_text(resume.rng_state);
  iteration_ = resume.iteration;
  apply_freeze();
}

Trainer Trainer::transfer(const TrainConfig& cfg, const data::Dataset& dataset,
                          const model::NetworkCheckpoint& init) {
  Trainer t(cfg, dataset, 0);
  model::restore(init, t.g_, t.d_);
  t.apply_freeze();
  return t;
}

void Trainer::apply_freeze() { g_.freeze(cfg_.frozen_layers); }

model::NetworkCheckpoint Trainer::checkpoint() const {
  return model::capture(g_, d_, iteration_, adam_g_, adam_d_, rng_text(rng_));
}

void Trainer::step() {
  const auto started = std::chrono::steady_clock::now();
  const Batch b = sample_batch(*dataset_, rng_, cfg_.batch_size, cfg_.crop_frames);
  IterationRecord rec;
  rec.iteration = iteration_;

  ad::Graph gg;
  const ad::Var x = gg.constant(b.x);
  const ad::Var fake = g_.forward(gg, x, b.target);

  {
    ad::Graph gd;
    const ad::Var loss = objectives::full_d_objective(objectives::adv_loss_d(
        objectives::trainable(d_, gd), gd.constant(b.x), b.source, gd.constant(fake.value()),
        b.target, cfg_.adversarial));
    rec.adv_d = rec.total_d = loss.value()[0];
    require_finite(rec.total_d, "discriminator loss", iteration_);
    d_.parameters().zero_grad();
    gd.backward(loss);
    optim::adam_update(d_.parameters(), adam_d_, hyper(cfg_, cfg_.lr_d));
  }

  const auto gen = objectives::trainable(g_, gg);
  const ad::Var adv =
      objectives::adv_loss_g(objectives::fixed(d_, gg), fake, b.source, b.target, cfg_.adversarial);
  const ad::Var cyc = objectives::cycle_loss_from(gen, x, fake, b.source);
  ad::Var id;
  if (objectives::identity_active(cfg_.weights, iteration_))
    id = objectives::identity_loss(gen, x, b.source);
  const ad::Var total = objectives::full_g_objective(adv, cyc, id, cfg_.weights, iteration_);
  rec.adv_g = adv.value()[0];
  rec.cyc = cyc.value()[0];
  rec.id = id.valid() ? id.value()[0] : 0.0;
  rec.total_g = total.value()[0];
  require_finite(rec.total_g, "generator loss", iteration_);

  model::ParameterStore& gp = g_.parameters();
  gp.zero_grad();
  gg.backward(total);
  const auto& names = g_.layer_names();
  rec.layer_grad_norms.assign(names.size(), 0.0);
  for (std::size_t i = 0; i < gp.size(); ++i) {
    const auto li = static_cast<std::size_t>(
        std::find(names.begin(), names.end(), gp.layer_of(i)) - names.begin());
    double s = 0.0;
    for (double v : gp[i].grad.data()) s += v * v;
    rec.layer_grad_norms[li] += s;
  }
  for (double& v : rec.layer_grad_norms) v = std::sqrt(v);
  rec.grad_norm_max = *std::max_element(rec.layer_grad_norms.begin(), rec.layer_grad_norms.end());
  optim::adam_update(gp, adam_g_, hyper(cfg_, cfg_.lr_g));

  ++iteration_;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  log_.records.push_back(std::move(rec));
}

std::size_t TrainResult::optimal_index(OptimalRule rule, std::uint64_t window) const {
  if (checkpoints.empty()) throw ContractViolation("run produced no checkpoints");
  if (rule == OptimalRule::Final || checkpoints.size() == 1) return checkpoints.size() - 1;
  std::size_t best = checkpoints.size() - 1;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const std::uint64_t it = checkpoints[k].iteration;
    if (it == 0) continue;
    const std::uint64_t lo = it > window ? it - window : 0;
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& r : log.records)
      if (r.iteration >= lo && r.iteration < it) {
        s += r.total_g;
        ++n;
      }
    if (n == 0) continue;
    const double m = s / static_cast<double>(n);
    if (m < best_value) {
      best_value = m;
      best = k;
    }
  }
  return best;
}

TrainResult run(Trainer& trainer, const TrainConfig& cfg, const CheckpointHook& hook) {
  TrainResult r;
  auto keep = [&] {
    r.checkpoints.push_back(trainer.checkpoint());
    if (hook) hook(r.checkpoints.back());
  };
  if (trainer.iteration() % cfg.checkpoint_every == 0) keep();
  try {
    while (trainer.iteration() < cfg.total_iterations) {
      trainer.step();
      if (trainer.iteration() % cfg.checkpoint_every == 0) keep();
    }
  } catch (const DivergenceError& e) {
    trainer.log().diverged = true;
    trainer.log().divergence_message = e.what();
    r.diverged = true;
  }
  r.log = trainer.log();
  return r;
}

TrainResult train(const TrainConfig& cfg, const data::Dataset& dataset,
                  const CheckpointHook& hook) {
  Trainer t(cfg, dataset);
  return run(t, cfg, hook);
}

ProbeSet make_probe(const data::Dataset& dataset, int count, int frames) {
  if (count < 1) throw ContractViolation("probe needs at least one sequence");
  if (frames < 4 || frames % 4 != 0)
    throw ContractViolation("probe frames must be a positive multiple of 4");
  const auto groups = dataset.by_domain();
  const int n = dataset.n_domains;
  ProbeSet p;
  for (int k = 0; k < count; ++k) {
    const int d = k % n;
    if (groups[d].empty()) throw InvalidData("domain " + std::to_string(d) + " has no sequences");
    const FeatureSequence& src = dataset.sequences[groups[d][(k / n) % groups[d].size()]];
    FeatureSequence s;
    s.domain = src.domain;
    s.id = src.id;
    s.features.resize(src.q(), frames);
    for (int t = 0; t < frames; ++t) s.features.col(t) = src.features.col(t % src.frames());
    p.sequences.push_back(std::move(s));
    p.targets.push_back((d + 1) % n);
  }
  return p;
}

svcca::ActivationDump record_activations(const model::Generator& g, const ProbeSet& probe,
                                         const std::set<std::string>& layers,
                                         std::uint64_t iteration) {
  const auto& names = g.layer_names();
  for (const auto& l : layers)
    if (std::find(names.begin(), names.end(), l) == names.end())
      throw LayerSetMismatch("generator has no layer '" + l + "'");
  ad::Graph graph;
  const ad::Var x = graph.constant(model::batch_tensor(probe.sequences));
  model::Taps taps;
  g.evaluate(graph, x, probe.targets, layers, &taps);
  svcca::ActivationDump dump;
  for (const auto& name : names)
    if (layers.contains(name))
      dump.push_back(model::to_activation_matrix(taps.at(name).value(), name, iteration));
  return dump;
}

svcca::ActivationDump record_activations(const model::NetworkCheckpoint& ckpt,
                                         const ProbeSet& probe,
                                         const std::set<std::string>& layers) {
  return record_activations(model::restore_generator(ckpt), probe, layers, ckpt.iteration);
}

}  // namespace gi::train
