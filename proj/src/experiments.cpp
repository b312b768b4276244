// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "gi/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gi/errors.hpp"

namespace gi::exp {

namespace {

constexpr const char* kCsvHeader = "experiment,seed,checkpoint,layer,similarity";
constexpr std::uint64_t kFreshSeedSalt = 0x5851F42D4C957F2DULL;

std::uint64_t parse_u64(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw FormatError("bad integer '" + s + "'");
  }
  if (used != s.size() || s.empty() || s[0] == '-') throw FormatError("bad integer '" + s + "'");
  return v;
}

double parse_f64(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("bad number '" + s + "'");
  }
  if (used != s.size()) throw FormatError("bad number '" + s + "'");
  return v;
}

double window_mean(const train::TrainLog& log, std::size_t begin, std::size_t end) {
  return log.mean_total_g(begin, end);
}

std::vector<std::string> repeat_names(int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back("R" + std::to_string(i));
  return out;
}

}  // namespace

void ExperimentReport::add_checkpoint(std::uint64_t iteration,
                                      const svcca::LayerSimilarityReport& layers) {
  for (const auto& [name, value] : layers) rows.push_back({iteration, name, value});
  const auto g = svcca::group_summary(layers);
  rows.push_back({iteration, kGroupD, g.downsample});
  rows.push_back({iteration, kGroupR, g.repeat});
  rows.push_back({iteration, kGroupU, g.upsample});
}

std::vector<ReportRow> ExperimentReport::at(std::uint64_t iteration) const {
  std::vector<ReportRow> out;
  for (const auto& r : rows)
    if (r.checkpoint == iteration) out.push_back(r);
  return out;
}

std::vector<std::uint64_t> ExperimentReport::checkpoints() const {
  std::vector<std::uint64_t> out;
  for (const auto& r : rows)
    if (out.empty() || out.back() != r.checkpoint) out.push_back(r.checkpoint);
  return out;
}

std::string to_csv(const std::vector<ExperimentReport>& reports) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.rows)
      out += rep.experiment + "," + std::to_string(rep.seed) + "," + std::to_string(r.checkpoint) +
             "," + r.layer + "," + data::format_double(r.similarity) + "\n";
  return out;
}

void emit_csv(const std::vector<ExperimentReport>& reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << to_csv(reports);
  if (!out) throw IoError("write failed for " + path);
}

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("missing report header");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw FormatError("report row has " + std::to_string(f.size()) + " fields");
    rows.push_back({f[0], parse_u64(f[1]), parse_u64(f[2]), f[3], parse_f64(f[4])});
  }
  return rows;
}

data::Dataset make_dataset(const config::ExperimentConfig& cfg, std::uint64_t data_seed) {
  data::SynthOptions o;
  o.n_domains = cfg.train.model.n_domains;
  o.sentences_per_domain = cfg.data.sentences_per_domain;
  o.q = cfg.train.model.q_features;
  o.t_min = cfg.data.t_min;
  o.t_max = cfg.data.t_max;
  o.seed = data_seed;
  const auto synth = data::synth_dataset(o);
  return data::normalize_per_domain(synth.dataset, synth.stats);
}

std::set<std::string> all_layers(const model::GeneratorConfig& cfg) {
  const auto names = model::generator_layer_names(cfg.repeat_blocks);
  return {names.begin(), names.end()};
}

Exp1Result run_exp1(const config::ExperimentConfig& cfg, const data::Dataset& dataset) {
  cfg.validate();
  const auto probe = train::make_probe(dataset, cfg.probe.sequences, cfg.probe.frames);
  const auto layers = all_layers(cfg.train.model);

  Exp1Result r;
  r.report.experiment = "exp1";
  r.report.seed = cfg.train.seed;
  r.report.fingerprint = cfg.train.model.fingerprint();
  svcca::ActivationDump initial;
  r.run = train::train(cfg.train, dataset, [&](const model::NetworkCheckpoint& c) {
    auto dump = train::record_activations(c, probe, layers);
    if (initial.empty()) initial = dump;
    r.report.add_checkpoint(c.iteration, svcca::compare_checkpoints(initial, dump, cfg.svcca));
  });
  if (r.run.diverged) throw DivergenceError(r.run.log.divergence_message);
  r.optimal = r.run.optimal_index(cfg.train.optimal, cfg.train.checkpoint_every);
  return r;
}

Exp2Result run_exp2(const config::ExperimentConfig& cfg, const model::NetworkCheckpoint& base,
                    const data::Dataset& dataset_b) {
  cfg.validate();
  if (base.fingerprint() != cfg.train.model.fingerprint())
    throw ConfigError("base checkpoint geometry does not match the configured network");

  train::TrainConfig tc = cfg.train;
  tc.total_iterations = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(cfg.train.total_iterations) * cfg.transfer_fraction));
  if (tc.total_iterations % tc.checkpoint_every != 0)
    throw ConfigError("transfer run length must be a multiple of checkpoint_every");
  tc.weights.id_cutoff_iterations = cfg.train.weights.id_cutoff_iterations;
  tc.init_from.reset();

  const auto probe = train::make_probe(dataset_b, cfg.probe.sequences, cfg.probe.frames);
  const auto layers = all_layers(cfg.train.model);
  const auto before = train::record_activations(base, probe, layers);

  model::GeneratorConfig fresh_cfg = cfg.train.model;
  fresh_cfg.seed = cfg.train.model.seed ^ kFreshSeedSalt;
  const auto fresh = train::record_activations(model::Generator(fresh_cfg), probe, layers);

  Exp2Result r;
  r.pretransfer.experiment = "exp2";
  r.fresh.experiment = "exp2-fresh";
  for (auto* rep : {&r.pretransfer, &r.fresh}) {
    rep->seed = cfg.train.seed;
    rep->fingerprint = cfg.train.model.fingerprint();
  }
  train::Trainer t = train::Trainer::transfer(tc, dataset_b, base);
  r.run = train::run(t, tc, [&](const model::NetworkCheckpoint& c) {
    const auto dump = train::record_activations(c, probe, layers);
    r.pretransfer.add_checkpoint(c.iteration, svcca::compare_checkpoints(before, dump, cfg.svcca));
    r.fresh.add_checkpoint(c.iteration, svcca::compare_checkpoints(fresh, dump, cfg.svcca));
  });
  if (r.run.diverged) throw DivergenceError(r.run.log.divergence_message);
  return r;
}

Exp3Result run_exp3(const config::ExperimentConfig& cfg, const data::Dataset& dataset,
                    const train::TrainResult* baseline) {
  cfg.validate();
  const auto names = model::generator_layer_names(cfg.train.model.repeat_blocks);
  for (const auto& v : cfg.variants)
    for (const auto& l : v.layers)
      if (l.empty() || l[0] != 'R' || std::find(names.begin(), names.end(), l) == names.end())
        throw ConfigError("variant " + v.name + " names '" + l + "', not a repeat layer");

  train::TrainResult own;
  if (!baseline) {
    train::TrainConfig tc = cfg.train;
    tc.frozen_layers.clear();
    own = train::train(tc, dataset);
    if (own.diverged) throw DivergenceError(own.log.divergence_message);
    baseline = &own;
  }
  const auto probe = train::make_probe(dataset, cfg.probe.sequences, cfg.probe.frames);
  const auto layers = all_layers(cfg.train.model);
  const auto& base_ckpt =
      baseline->checkpoints[baseline->optimal_index(cfg.train.optimal, cfg.train.checkpoint_every)];
  const auto base_dump = train::record_activations(base_ckpt, probe, layers);
  const auto& init = baseline->checkpoints.front();

  Exp3Result out;
  out.baseline_optimal_iteration = base_ckpt.iteration;
  for (const auto& v : cfg.variants) {
    train::TrainConfig tc = cfg.train;
    tc.frozen_layers = v.layers;
    Exp3Variant ev;
    ev.variant = v;
    ev.run = train::train(tc, dataset);
    if (ev.run.diverged) throw DivergenceError(ev.run.log.divergence_message);

    const model::Generator g0 = model::restore_generator(init);
    ev.frozen_bit_equal = true;
    for (const auto& c : ev.run.checkpoints) {
      const model::Generator gc = model::restore_generator(c);
      for (const auto& layer : v.layers)
        for (std::size_t i : g0.parameters().indices_of_layer(layer))
          if (!(gc.parameters()[i].value == g0.parameters()[i].value)) ev.frozen_bit_equal = false;
    }

    const auto& opt =
        ev.run.checkpoints[ev.run.optimal_index(cfg.train.optimal, cfg.train.checkpoint_every)];
    ev.optimal_iteration = opt.iteration;
    ev.report.experiment = "exp3-" + v.name;
    ev.report.seed = cfg.train.seed;
    ev.report.fingerprint = cfg.train.model.fingerprint();
    ev.report.add_checkpoint(opt.iteration,
                             svcca::compare_checkpoints(
                                 base_dump, train::record_activations(opt, probe, layers), cfg.svcca));
    out.variants.push_back(std::move(ev));
  }
  return out;
}

Exp4Result run_exp4(const config::ExperimentConfig& cfg, const data::Dataset& dataset) {
  cfg.validate();
  const auto probe = train::make_probe(dataset, cfg.probe.sequences, cfg.probe.frames);
  Exp4Result out;
  for (int depth : cfg.depths) {
    train::TrainConfig tc = cfg.train;
    tc.model.repeat_blocks = depth;
    tc.frozen_layers.clear();
    const auto run = train::train(tc, dataset);
    const auto& log = run.log;

    DepthRow row;
    row.depth = depth;
    row.diverged = run.diverged;
    row.repeat_layers = repeat_names(depth);
    const std::size_t n = log.records.size();
    const std::size_t w = std::min<std::size_t>(100, std::max<std::size_t>(1, n / 2));
    if (n > 0) {
      double a = 0, d = 0, c = 0, i = 0, t = 0;
      for (std::size_t k = n - std::min(w, n); k < n; ++k) {
        a += log.records[k].adv_g;
        d += log.records[k].adv_d;
        c += log.records[k].cyc;
        i += log.records[k].id;
        t += log.records[k].total_g;
      }
      const double m = static_cast<double>(std::min(w, n));
      row.adv_g = a / m;
      row.adv_d = d / m;
      row.cyc = c / m;
      row.id = i / m;
      row.total_g = t / m;
    }
    const double first = window_mean(log, 0, w), last = window_mean(log, n - std::min(w, n), n);
    row.converged = !run.diverged && n > 0 && std::isfinite(last) && last < first;

    const auto& names = log.layer_names;
    std::vector<std::size_t> idx;
    for (const auto& rl : row.repeat_layers)
      idx.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), rl) -
                                             names.begin()));
    for (const auto& c : run.checkpoints) {
      const std::uint64_t hi = std::max<std::uint64_t>(c.iteration, 1);
      const std::uint64_t lo = c.iteration > tc.checkpoint_every ? c.iteration - tc.checkpoint_every : 0;
      std::vector<double> means(idx.size(), 0.0);
      std::size_t count = 0;
      for (const auto& r : log.records)
        if (r.iteration >= lo && r.iteration < hi) {
          for (std::size_t j = 0; j < idx.size(); ++j) means[j] += r.layer_grad_norms[idx[j]];
          ++count;
        }
      for (double& m : means) m = count ? m / static_cast<double>(count) : 0.0;
      row.checkpoints.push_back(c.iteration);
      row.grad_norms.push_back(std::move(means));
    }
    row.vanishing_indicator = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < idx.size(); ++j) {
      double s = 0;
      for (const auto& r : log.records) s += r.layer_grad_norms[idx[j]];
      row.vanishing_indicator = std::min(row.vanishing_indicator, n ? s / static_cast<double>(n) : 0.0);
    }
    row.mode_collapse_index =
        mode_collapse_index(model::restore_generator(run.checkpoints.back()), probe.sequences);
    out.rows.push_back(std::move(row));
  }
  return out;
}

void write_exp4_csv(const Exp4Result& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "depth,final_adv_g,final_adv_d,final_cyc,final_id,final_total_g,"
         "proxy_vanishing_grad_min_mean_norm,proxy_converged,diverged,proxy_mode_collapse_index\n";
  for (const auto& row : r.rows)
    out << row.depth << ',' << data::format_double(row.adv_g) << ','
        << data::format_double(row.adv_d) << ',' << data::format_double(row.cyc) << ','
        << data::format_double(row.id) << ',' << data::format_double(row.total_g) << ','
        << data::format_double(row.vanishing_indicator) << ',' << (row.converged ? 1 : 0) << ','
        << (row.diverged ? 1 : 0) << ',' << data::format_double(row.mode_collapse_index) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

double mode_collapse_index(const ConvertFn& g, const std::vector<FeatureSequence>& probe,
                           int n_domains) {
  if (n_domains < 2) throw ContractViolation("mode collapse index needs at least 2 domains");
  if (probe.empty()) throw ContractViolation("empty probe set");
  double scale = 0.0, spread = 0.0;
  for (const auto& x : probe) {
    scale += x.features.cwiseAbs().mean();
    std::vector<Eigen::MatrixXd> outs;
    for (int k = 0; k < n_domains; ++k) outs.push_back(g(x, DomainCode{k}));
    double pairs = 0.0, sum = 0.0;
    for (int i = 0; i < n_domains; ++i)
      for (int j = i + 1; j < n_domains; ++j) {
        sum += (outs[i] - outs[j]).cwiseAbs().mean();
        pairs += 1.0;
      }
    spread += sum / pairs;
  }
  scale /= static_cast<double>(probe.size());
  spread /= static_cast<double>(probe.size());
  if (!(scale > 0.0)) throw InvalidData("probe inputs have zero scale");
  return spread / scale;
}

double mode_collapse_index(const model::Generator& g, const std::vector<FeatureSequence>& probe) {
  return mode_collapse_index(
      [&g](const FeatureSequence& x, DomainCode c) { return model::convert(g, x, c).converted.features; },
      probe, g.config().n_domains);
}

}  // namespace gi::exp
