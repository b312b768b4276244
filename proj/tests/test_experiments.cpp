// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "gi/errors.hpp"
#include "gi/experiments.hpp"
#include "helpers.hpp"

using namespace gi;
using namespace gi::exp;

namespace {

config::ExperimentConfig tiny_experiment() {
  config::ExperimentConfig c;
  c.train.model = gi::testing::tiny_config(0);
  c.train.total_iterations = 20;
  c.train.checkpoint_every = 10;
  c.train.batch_size = 2;
  c.train.crop_frames = 16;
  c.train.lr_g = c.train.lr_d = 1e-3;
  c.train.weights.id_cutoff_iterations = 1;
  c.data.sentences_per_domain = 3;
  c.data.t_min = 20;
  c.data.t_max = 40;
  c.probe.sequences = 8;
  c.probe.frames = 16;
  c.variants = {{"A", {"R2"}}};
  c.depths = {1, 3};
  return c;
}

void check_groups(const ExperimentReport& r) {
  for (auto it : r.checkpoints()) {
    double sums[3] = {0, 0, 0};
    int counts[3] = {0, 0, 0};
    std::map<std::string, double> groups;
    for (const auto& row : r.at(it)) {
      CHECK(row.similarity >= 0.0);
      CHECK(row.similarity <= 1.0);
      if (row.layer.rfind("GROUP_", 0) == 0) {
        groups[row.layer] = row.similarity;
        continue;
      }
      const int g = static_cast<int>(svcca::layer_group(row.layer));
      sums[g] += row.similarity;
      ++counts[g];
    }
    REQUIRE(groups.size() == 3);
    CHECK(std::abs(groups[kGroupD] - sums[0] / counts[0]) <= 1e-12);
    CHECK(std::abs(groups[kGroupR] - sums[1] / counts[1]) <= 1e-12);
    CHECK(std::abs(groups[kGroupU] - sums[2] / counts[2]) <= 1e-12);
  }
}

}  // namespace

TEST_CASE("report rows, groups and CSV layout") {
  ExperimentReport r{"exp1", 3, 42, {}};
  const auto names = model::generator_layer_names(9);
  for (std::uint64_t it = 0; it < 10; ++it) {
    svcca::LayerSimilarityReport layers;
    for (std::size_t i = 0; i < names.size(); ++i)
      layers.emplace_back(names[i], 1.0 / (1.0 + static_cast<double>(i + it)));
    r.add_checkpoint(it * 200, layers);
  }
  CHECK(r.rows.size() == 10 * (17 + 3));
  CHECK(r.checkpoints().size() == 10);
  check_groups(r);

  const std::string csv = to_csv({r});
  CHECK(csv.rfind("experiment,seed,checkpoint,layer,similarity\n", 0) == 0);
  CHECK(to_csv({r}) == csv);
  const auto parsed = parse_csv(csv);
  REQUIRE(parsed.size() == r.rows.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].experiment == "exp1");
    CHECK(parsed[i].seed == 3);
    CHECK(parsed[i].checkpoint == r.rows[i].checkpoint);
    CHECK(parsed[i].layer == r.rows[i].layer);
    CHECK(parsed[i].similarity == r.rows[i].similarity);
  }
  CHECK(parsed[17].layer == kGroupD);

  // group means recomputed from the parsed layer rows
  std::map<std::pair<std::uint64_t, std::string>, double> group_rows;
  std::map<std::pair<std::uint64_t, int>, std::pair<double, int>> acc;
  for (const auto& row : parsed) {
    if (row.layer.rfind("GROUP_", 0) == 0) {
      group_rows[{row.checkpoint, row.layer}] = row.similarity;
    } else {
      auto& a = acc[{row.checkpoint, static_cast<int>(svcca::layer_group(row.layer))}];
      a.first += row.similarity;
      ++a.second;
    }
  }
  const char* group_names[] = {kGroupD, kGroupR, kGroupU};
  for (const auto& [key, a] : acc)
    CHECK(std::abs(group_rows[{key.first, group_names[key.second]}] - a.first / a.second) <= 1e-12);

  const auto dir = gi::testing::temp_dir("csv");
  emit_csv({r}, (dir / "a.csv").string());
  emit_csv({r}, (dir / "b.csv").string());
  std::ifstream a(dir / "a.csv"), b(dir / "b.csv");
  const std::string sa{std::istreambuf_iterator<char>(a), {}}, sb{std::istreambuf_iterator<char>(b), {}};
  CHECK(sa == sb);
  CHECK(sa == csv);

  CHECK_THROWS_AS(parse_csv("nope\n"), FormatError);
  CHECK_THROWS_AS(parse_csv("experiment,seed,checkpoint,layer,similarity\nexp1,0,x,D1,0.5\n"),
                  FormatError);
}

TEST_CASE("mode collapse index") {
  std::vector<FeatureSequence> probe(3);
  for (auto& s : probe) {
    s.features = Eigen::MatrixXd::Ones(4, 8);
    s.id = "p";
  }
  const ConvertFn ignore = [](const FeatureSequence& x, DomainCode) { return x.features; };
  CHECK(mode_collapse_index(ignore, probe, 3) == 0.0);
  const ConvertFn code = [](const FeatureSequence& x, DomainCode c) {
    return Eigen::MatrixXd::Constant(x.q(), x.frames(), c.index);
  };
  CHECK(mode_collapse_index(code, probe, 2) == 1.0);
  // pairs (0,1) (0,2) (1,2) -> (1 + 2 + 1) / 3
  CHECK(mode_collapse_index(code, probe, 3) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(mode_collapse_index(code, probe, 1), ContractViolation);
  auto zero = probe;
  for (auto& s : zero) s.features.setZero();
  CHECK_THROWS_AS(mode_collapse_index(code, zero, 2), InvalidData);
}

TEST_CASE("mode collapse index of a network matches a direct double loop") {
  auto cfg = tiny_experiment();
  cfg.train.model.n_domains = 3;
  const auto ds = make_dataset(cfg, 1);
  const auto run = train::train(cfg.train, ds);
  const model::Generator g = model::restore_generator(run.final_checkpoint());
  const auto probe = train::make_probe(ds, 5, 16).sequences;

  double total = 0, scale = 0, cells = 0;
  for (const auto& x : probe) {
    std::vector<Eigen::MatrixXd> outs;
    for (int c = 0; c < 3; ++c) outs.push_back(model::convert(g, x, DomainCode{c}).converted.features);
    double pair_sum = 0;
    int pairs = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        double s = 0;
        for (int r = 0; r < x.q(); ++r)
          for (int t = 0; t < x.frames(); ++t) s += std::abs(outs[i](r, t) - outs[j](r, t));
        pair_sum += s / (x.q() * x.frames());
        ++pairs;
      }
    total += pair_sum / pairs;
    for (int r = 0; r < x.q(); ++r)
      for (int t = 0; t < x.frames(); ++t) scale += std::abs(x.features(r, t));
    cells += x.q() * x.frames();
  }
  const double expected = (total / probe.size()) / (scale / cells);
  CHECK(std::abs(mode_collapse_index(g, probe) - expected) <= 1e-12);
  CHECK(expected > 0.0);
}

TEST_CASE("exp1 grid is complete and starts at one") {
  const auto cfg = tiny_experiment();
  const auto ds = make_dataset(cfg, cfg.data.seed);
  const auto a = run_exp1(cfg, ds);
  const auto& r = a.report;
  CHECK(r.experiment == "exp1");
  CHECK(r.fingerprint == cfg.train.model.fingerprint());
  REQUIRE(r.checkpoints() == std::vector<std::uint64_t>{0, 10, 20});
  CHECK(r.rows.size() == 3 * (10 + 3));
  for (const auto& row : r.at(0)) CHECK(std::abs(row.similarity - 1.0) <= 1e-8);
  check_groups(r);
  CHECK(a.optimal >= 1);

  const auto b = run_exp1(cfg, ds);
  CHECK(to_csv({a.report}) == to_csv({b.report}));
}

TEST_CASE("exp2 compares against the pre-transfer and a fresh network") {
  const auto cfg = tiny_experiment();
  const auto ds_a = make_dataset(cfg, cfg.data.seed);
  const auto ds_b = make_dataset(cfg, cfg.data.transfer_seed);
  const auto base = run_exp1(cfg, ds_a);
  const auto& ck = base.run.checkpoints[base.optimal];
  const auto r = run_exp2(cfg, ck, ds_b);
  CHECK(r.pretransfer.experiment == "exp2");
  CHECK(r.fresh.experiment == "exp2-fresh");
  CHECK(r.run.final_checkpoint().iteration == 10);
  REQUIRE(r.pretransfer.checkpoints() == std::vector<std::uint64_t>{0, 10});
  REQUIRE(r.fresh.checkpoints() == r.pretransfer.checkpoints());
  for (const auto& row : r.pretransfer.at(0)) CHECK(std::abs(row.similarity - 1.0) <= 1e-8);
  check_groups(r.pretransfer);
  check_groups(r.fresh);

  auto shorter = cfg;
  shorter.transfer_fraction = 0.01;
  const auto none = run_exp2(shorter, ck, ds_b);
  REQUIRE(none.pretransfer.checkpoints() == std::vector<std::uint64_t>{0});
  for (const auto& row : none.pretransfer.rows) CHECK(std::abs(row.similarity - 1.0) <= 1e-8);

  auto other = cfg;
  other.train.model.base_channels = 2;
  CHECK_THROWS_AS(run_exp2(other, ck, ds_b), ConfigError);
}

TEST_CASE("exp3 variants keep frozen layers at init") {
  auto cfg = tiny_experiment();
  cfg.variants = {{"A", {"R2"}}, {"B", {"R1", "R2"}}};
  const auto ds = make_dataset(cfg, cfg.data.seed);
  const auto r = run_exp3(cfg, ds);
  REQUIRE(r.variants.size() == 2);
  for (const auto& v : r.variants) {
    CHECK(v.frozen_bit_equal);
    CHECK(v.report.experiment == "exp3-" + v.variant.name);
    CHECK(v.report.rows.size() == 10 + 3);
    check_groups(v.report);
  }
  CHECK(config::standard_variants()[0].layers == std::set<std::string>{"R2", "R3"});
  CHECK(config::standard_variants()[1].layers == std::set<std::string>{"R4", "R5"});
  CHECK(config::standard_variants()[2].layers == std::set<std::string>{"R6", "R7", "R8"});
}

TEST_CASE("exp4 depth sweep rows") {
  const auto cfg = tiny_experiment();
  const auto ds = make_dataset(cfg, cfg.data.seed);
  const auto r = run_exp4(cfg, ds);
  REQUIRE(r.rows.size() == 2);
  for (const auto& row : r.rows) {
    CHECK(static_cast<int>(row.repeat_layers.size()) == row.depth);
    CHECK(row.checkpoints == std::vector<std::uint64_t>{0, 10, 20});
    REQUIRE(row.grad_norms.size() == 3);
    for (const auto& g : row.grad_norms) {
      CHECK(static_cast<int>(g.size()) == row.depth);
      for (double v : g) CHECK(v > 0.0);
    }
    CHECK(row.vanishing_indicator > 0.0);
    CHECK_FALSE(row.diverged);
    CHECK(std::isfinite(row.mode_collapse_index));
  }
  const auto dir = gi::testing::temp_dir("exp4");
  write_exp4_csv(r, (dir / "exp4.csv").string());
  std::ifstream in(dir / "exp4.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.find("proxy_") != std::string::npos);
}
