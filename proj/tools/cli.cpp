// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "gi/checkpoint.hpp"
#include "gi/config.hpp"
#include "gi/dataio.hpp"
#include "gi/errors.hpp"
#include "gi/experiments.hpp"
#include "gi/svcca.hpp"
#include "gi/trainer.hpp"

namespace gi::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kInvalid = 2;
constexpr int kDiverged = 3;

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

json groups_at(const exp::ExperimentReport& r, std::uint64_t iteration) {
  json j = json::object();
  for (const auto& row : r.at(iteration))
    if (row.layer.rfind("GROUP_", 0) == 0) j[row.layer] = row.similarity;
  return j;
}

fs::path prepare(const std::string& out) {
  fs::path p(out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + out + ": " + ec.message());
  return p;
}

int cmd_train(const std::string& config_path, const std::string& out_dir, std::ostream& out) {
  const auto cfg = config::load_config(config_path);
  const fs::path dir = prepare(out_dir);
  const auto dataset = exp::make_dataset(cfg, cfg.data.seed);
  const auto result = train::train(cfg.train, dataset, [&](const model::NetworkCheckpoint& c) {
    model::save_checkpoint(c, (dir / ("checkpoint_" + std::to_string(c.iteration) + ".gick")).string());
  });
  result.log.write_csv((dir / "train_log.csv").string());
  json summary = {{"seed", cfg.train.seed},
                  {"fingerprint", cfg.train.model.fingerprint()},
                  {"iterations", result.log.records.size()},
                  {"diverged", result.diverged}};
  if (result.diverged) summary["divergence"] = result.log.divergence_message;
  summary["optimal_iteration"] =
      result.checkpoints[result.optimal_index(cfg.train.optimal, cfg.train.checkpoint_every)]
          .iteration;
  write_json(summary, dir / "summary.json");
  out << "trained " << result.log.records.size() << " iterations into " << dir.string() << '\n';
  return result.diverged ? kDiverged : kOk;
}

int cmd_exp1(const config::ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto dataset = exp::make_dataset(cfg, cfg.data.seed);
  std::vector<exp::ExperimentReport> reports;
  json summary = json::array();
  for (auto seed : cfg.seeds) {
    const auto r = exp::run_exp1(cfg.with_seed(seed), dataset);
    r.run.log.write_csv((dir / ("exp1_seed" + std::to_string(seed) + "_log.csv")).string());
    const auto final_it = r.run.final_checkpoint().iteration;
    summary.push_back({{"seed", seed},
                       {"optimal_iteration", r.run.checkpoints[r.optimal].iteration},
                       {"final_iteration", final_it},
                       {"final_groups", groups_at(r.report, final_it)}});
    reports.push_back(r.report);
  }
  exp::emit_csv(reports, (dir / "exp1.csv").string());
  write_json({{"experiment", "exp1"}, {"runs", summary}}, dir / "exp1.json");
  out << "exp1: " << reports.size() << " seed(s) written to " << dir.string() << '\n';
  return kOk;
}

int cmd_exp2(const config::ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto data_a = exp::make_dataset(cfg, cfg.data.seed);
  const auto data_b = exp::make_dataset(cfg, cfg.data.transfer_seed);
  std::vector<exp::ExperimentReport> reports;
  json summary = json::array();
  for (auto seed : cfg.seeds) {
    const auto sc = cfg.with_seed(seed);
    model::NetworkCheckpoint base;
    if (sc.base_checkpoint) {
      base = model::load_checkpoint(*sc.base_checkpoint);
    } else {
      const auto run = train::train(sc.train, data_a);
      if (run.diverged) throw DivergenceError(run.log.divergence_message);
      base = run.checkpoints[run.optimal_index(sc.train.optimal, sc.train.checkpoint_every)];
    }
    const auto r = exp::run_exp2(sc, base, data_b);
    json per = json::array();
    for (auto it : r.pretransfer.checkpoints())
      per.push_back({{"checkpoint", it},
                     {"pretransfer", groups_at(r.pretransfer, it)},
                     {"fresh", groups_at(r.fresh, it)}});
    summary.push_back({{"seed", seed}, {"base_iteration", base.iteration}, {"checkpoints", per}});
    reports.push_back(r.pretransfer);
    reports.push_back(r.fresh);
  }
  exp::emit_csv(reports, (dir / "exp2.csv").string());
  write_json({{"experiment", "exp2"}, {"runs", summary}}, dir / "exp2.json");
  out << "exp2: " << cfg.seeds.size() << " seed(s) written to " << dir.string() << '\n';
  return kOk;
}

int cmd_exp3(config::ExperimentConfig cfg, bool paper_variants, const fs::path& dir,
             std::ostream& out) {
  if (paper_variants) cfg.variants = config::standard_variants();
  const auto dataset = exp::make_dataset(cfg, cfg.data.seed);
  std::vector<exp::ExperimentReport> reports;
  json summary = json::array();
  for (auto seed : cfg.seeds) {
    const auto r = exp::run_exp3(cfg.with_seed(seed), dataset);
    json variants = json::array();
    for (const auto& v : r.variants) {
      variants.push_back({{"name", v.variant.name},
                          {"frozen_layers", v.variant.layers},
                          {"frozen_bit_equal", v.frozen_bit_equal},
                          {"optimal_iteration", v.optimal_iteration},
                          {"groups", groups_at(v.report, v.optimal_iteration)}});
      reports.push_back(v.report);
    }
    summary.push_back({{"seed", seed},
                       {"baseline_optimal_iteration", r.baseline_optimal_iteration},
                       {"variants", variants}});
  }
  exp::emit_csv(reports, (dir / "exp3.csv").string());
  write_json({{"experiment", "exp3"}, {"runs", summary}}, dir / "exp3.json");
  out << "exp3: " << cfg.seeds.size() << " seed(s) written to " << dir.string() << '\n';
  return kOk;
}

int cmd_exp4(const config::ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto dataset = exp::make_dataset(cfg, cfg.data.seed);
  json summary = json::array();
  for (auto seed : cfg.seeds) {
    const auto r = exp::run_exp4(cfg.with_seed(seed), dataset);
    exp::write_exp4_csv(r, (dir / ("exp4_seed" + std::to_string(seed) + ".csv")).string());
    json rows = json::array();
    for (const auto& row : r.rows) {
      json grads = json::array();
      for (std::size_t k = 0; k < row.checkpoints.size(); ++k) {
        json layers = json::object();
        for (std::size_t j = 0; j < row.repeat_layers.size(); ++j)
          layers[row.repeat_layers[j]] = row.grad_norms[k][j];
        grads.push_back({{"checkpoint", row.checkpoints[k]}, {"mean_grad_norm", layers}});
      }
      rows.push_back({{"depth", row.depth},
                      {"final_window_means",
                       {{"adv_g", row.adv_g},
                        {"adv_d", row.adv_d},
                        {"cyc", row.cyc},
                        {"id", row.id},
                        {"total_g", row.total_g}}},
                      {"proxy_vanishing_grad_min_mean_norm", row.vanishing_indicator},
                      {"proxy_converged", row.converged},
                      {"diverged", row.diverged},
                      {"proxy_mode_collapse_index", row.mode_collapse_index},
                      {"grad_norms", grads}});
    }
    summary.push_back({{"seed", seed}, {"depths", rows}});
  }
  write_json({{"experiment", "exp4"}, {"runs", summary}}, dir / "exp4.json");
  out << "exp4: " << cfg.seeds.size() << " seed(s) written to " << dir.string() << '\n';
  return kOk;
}

int cmd_svcca(const std::string& a, const std::string& b, double threshold, double ridge,
              std::ostream& out) {
  const auto ma = data::read_amat(a);
  const auto mb = data::read_amat(b);
  const auto r = svcca::svcca(ma, mb, threshold, ridge);
  json j = {{"layer_a", ma.layer_name},
            {"layer_b", mb.layer_name},
            {"similarity", r.mean()},
            {"retained_a", r.retained_x},
            {"retained_b", r.retained_y},
            {"correlations", std::vector<double>(r.correlations.data(),
                                                 r.correlations.data() + r.correlations.size())}};
  out << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GAN voice-conversion interpretability workbench", "gan-introspect"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", amat_a, amat_b;
  double threshold = svcca::kDefaultVarianceThreshold, ridge = svcca::kDefaultRidge;
  bool paper_variants = false;

  auto* train_cmd = app.add_subcommand("train", "train one network and save its checkpoints");
  train_cmd->add_option("--config", config_path, "JSON configuration")->required();
  train_cmd->add_option("--out", out_dir, "output directory");

  std::map<std::string, CLI::App*> exps;
  for (const char* name : {"exp1", "exp2", "exp3", "exp4"}) {
    auto* c = app.add_subcommand(name, std::string("run experiment ") + (name + 3));
    c->add_option("--config", config_path, "JSON configuration")->required();
    c->add_option("--out", out_dir, "output directory")->required();
    c->add_flag("--paper-variants", paper_variants, "use frozen sets A={R2,R3} B={R4,R5} C={R6,R7,R8}");
    exps[name] = c;
  }

  auto* svcca_cmd = app.add_subcommand("svcca", "similarity between two AMAT activation files");
  svcca_cmd->add_option("--a", amat_a, "first AMAT file")->required();
  svcca_cmd->add_option("--b", amat_b, "second AMAT file")->required();
  svcca_cmd->add_option("--threshold", threshold, "retained variance fraction");
  svcca_cmd->add_option("--ridge", ridge, "covariance ridge");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(config_path, out_dir, out);
    if (svcca_cmd->parsed()) return cmd_svcca(amat_a, amat_b, threshold, ridge, out);
    const auto cfg = config::load_config(config_path);
    const fs::path dir = prepare(out_dir);
    if (exps["exp1"]->parsed()) return cmd_exp1(cfg, dir, out);
    if (exps["exp2"]->parsed()) return cmd_exp2(cfg, dir, out);
    if (exps["exp3"]->parsed()) return cmd_exp3(cfg, paper_variants, dir, out);
    if (exps["exp4"]->parsed()) return cmd_exp4(cfg, dir, out);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace gi::cli
