// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "gi/checkpoint.hpp"
#include "gi/config.hpp"
#include "gi/experiments.hpp"
#include "gi/grad_check.hpp"
#include "gi/objectives.hpp"
#include "gi/ops.hpp"
#include "gi/svcca.hpp"
#include "gi/trainer.hpp"
#include "oracles.hpp"

using namespace gi;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::printf("C%d %s %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Eigen::MatrixXd gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Tensor gaussian(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = n(rng);
  return t;
}

svcca::ActivationMatrix act(Eigen::MatrixXd m) { return {"R1", std::move(m), 0}; }

bool sorted_unit(const Eigen::VectorXd& c) {
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (!(c[i] >= 0.0 && c[i] <= 1.0)) return false;
    if (i > 0 && c[i] > c[i - 1] + 1e-8) return false;
  }
  return true;
}

void c1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(8);
  auto u = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int cols = u(60, 300), ra = u(2, 12), rb = u(2, 12);
    Eigen::MatrixXd a = gaussian(ra, cols, rng);
    Eigen::MatrixXd b = gaussian(rb, cols, rng);
    for (int i = 0; i < ra; ++i) a.row(i) *= std::pow(0.6, i);
    const int shared = std::min(ra, rb) / 2;
    b.topRows(shared) += a.topRows(shared);
    const auto r = svcca::svcca(act(a), act(b), 0.99, 0.0);
    const Eigen::VectorXd o = oracle::svcca_gev(a, b, 0.99, 0.0);
    if (r.correlations.size() != o.size()) {
      worst = INFINITY;
      continue;
    }
    worst = std::max(worst, (r.correlations - o).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  report(1, worst <= 1e-6 && secs < 10.0,
         "max_abs_err=" + fmt("%.3e", worst) + " (tol 1e-6) runtime=" + fmt("%.2f", secs) + "s (< 10s)");
}

void c2() {
  std::mt19937_64 rng(21);
  auto u = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  double self_err = 0, inv_err = 0, inv_err_ridge = 0;
  int unsorted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int cols = u(40, 300), ra = u(1, 12), rb = u(1, 12);
    const Eigen::MatrixXd a = gaussian(ra, cols, rng);
    Eigen::MatrixXd b = gaussian(rb, cols, rng);
    const int shared = std::min(ra, rb) / 2;
    b.topRows(shared) += 0.7 * a.topRows(shared);

    const auto self = svcca::svcca(act(a), act(a));
    self_err = std::max(self_err, (self.correlations.array() - 1.0).abs().maxCoeff());

    Eigen::MatrixXd ma = gaussian(ra, ra, rng), mb = gaussian(rb, rb, rng);
    ma.diagonal().array() += 3.0;
    mb.diagonal().array() += 3.0;
    using svcca::ReducedSubspace;
    const auto sa = ReducedSubspace::from_matrix(a), sb = ReducedSubspace::from_matrix(b);
    const auto ta = ReducedSubspace::from_matrix(ma * a), tb = ReducedSubspace::from_matrix(mb * b);
    const auto base = svcca::cca(sa, sb, 0.0);
    const auto moved = svcca::cca(ta, tb, 0.0);
    inv_err = std::max(inv_err, (base.correlations - moved.correlations).cwiseAbs().maxCoeff());
    inv_err_ridge = std::max(inv_err_ridge, (svcca::cca(sa, sb).correlations -
                                             svcca::cca(ta, tb).correlations).cwiseAbs().maxCoeff());

    const auto pipe = svcca::svcca(act(a), act(b));
    unsorted += !sorted_unit(base.correlations) + !sorted_unit(pipe.correlations) +
                !sorted_unit(self.correlations);
  }
  report(2, self_err <= 1e-8 && inv_err <= 1e-6 && unsorted == 0,
         "cases=1000 self_err=" + fmt("%.3e", self_err) + " (tol 1e-8) invariance_err=" +
             fmt("%.3e", inv_err) + " (tol 1e-6, ridge 0) unsorted_or_out_of_range=" +
             std::to_string(unsorted) + " [info: invariance_err at default ridge=" +
             fmt("%.1e", inv_err_ridge) + "]");
}

void c3() {
  const auto values = oracle::published_layer_values_1e5();
  const auto names = model::generator_layer_names(9);
  svcca::LayerSimilarityReport r;
  for (std::size_t i = 0; i < names.size(); ++i) r.emplace_back(names[i], values[i]);
  const auto g = svcca::group_summary(r);
  const double ed = std::abs(g.downsample - 0.646559865), er = std::abs(g.repeat - 0.652884765),
               eu = std::abs(g.upsample - 0.431564183);
  report(3, ed <= 5e-4 && er <= 5e-4 && eu <= 5e-4,
         "D=" + fmt("%.6f", g.downsample) + " R=" + fmt("%.6f", g.repeat) + " U=" +
             fmt("%.6f", g.upsample) + " max_dev=" + fmt("%.2e", std::max({ed, er, eu})) + " (tol 5e-4)");
}

double check_op(const std::vector<Tensor>& inputs,
                const std::function<ad::Var(ad::Graph&, std::span<const ad::Var>)>& op,
                std::mt19937_64& rng) {
  Tensor cot;
  {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) vars.push_back(g.constant(t));
    cot = gaussian(op(g, vars).shape(), rng);
  }
  return ad::grad_check(
      [&](ad::Graph& g, std::span<const ad::Var> v) { return ad::project(op(g, v), cot); }, inputs);
}

model::GeneratorConfig tiny(std::uint64_t seed) {
  model::GeneratorConfig c;
  c.q_features = 8;
  c.base_channels = 1;
  c.repeat_blocks = 2;
  c.n_domains = 2;
  c.seed = seed;
  return c;
}

std::vector<Parameter*> params_of(model::ParameterStore& s, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.5);
  std::vector<Parameter*> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (double& v : s[i].value.data()) v = n(rng);
    out.push_back(&s[i]);
  }
  return out;
}

void c4() {
  using namespace gi::ad;
  const auto t0 = Clock::now();
  std::map<std::string, double> worst;
  auto note = [&](const std::string& k, double e) { worst[k] = std::max(worst[k], e); };
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    auto r = [&](Shape s) { return gaussian(std::move(s), rng); };
    note("conv2d", check_op({r({2, 2, 5, 6}), r({3, 2, 3, 3}), r({3})},
                            [](Graph&, std::span<const Var> v) {
                              return conv2d(v[0], v[1], v[2], {2, 1}, {1, 1});
                            },
                            rng));
    note("conv1d", check_op({r({2, 3, 9}), r({4, 3, 5}), r({4})},
                            [](Graph&, std::span<const Var> v) { return conv1d(v[0], v[1], v[2], 1, 2); },
                            rng));
    note("conv_transpose2d", check_op({r({1, 2, 3, 4}), r({2, 3, 4, 4}), r({3})},
                                      [](Graph&, std::span<const Var> v) {
                                        return conv_transpose2d(v[0], v[1], v[2], {2, 2}, {1, 1});
                                      },
                                      rng));
    note("glu", check_op({r({2, 4, 3, 3})}, [](Graph&, std::span<const Var> v) { return glu(v[0]); }, rng));
    note("instance_norm",
         check_op({r({2, 3, 4, 5}), r({3}), r({3})},
                  [](Graph&, std::span<const Var> v) { return instance_norm(v[0], v[1], v[2]); }, rng));
    note("cond_instance_norm", check_op({r({3, 2, 7}), r({3, 2}), r({3, 2})},
                                        [](Graph&, std::span<const Var> v) {
                                          static const std::vector<int> codes = {2, 0, 2};
                                          return cond_instance_norm(v[0], codes, v[1], v[2]);
                                        },
                                        rng));
    note("global_sum_pool", check_op({r({2, 3, 4, 5})},
                                     [](Graph&, std::span<const Var> v) { return global_sum_pool(v[0]); },
                                     rng));
    note("fully_connected",
         check_op({r({3, 4}), r({2, 4}), r({2})},
                  [](Graph&, std::span<const Var> v) { return fully_connected(v[0], v[1], v[2]); }, rng));
    note("pair_projection", check_op({r({3, 4}), r({6, 4})},
                                     [](Graph&, std::span<const Var> v) {
                                       static const std::vector<int> rows = {5, 0, 5};
                                       return pair_projection(v[0], v[1], rows);
                                     },
                                     rng));
    note("reshape", check_op({r({2, 2, 3, 4})},
                             [](Graph&, std::span<const Var> v) {
                               return reshape_1d_to_2d(reshape_2d_to_1d(v[0]), 3);
                             },
                             rng));
    note("add_sub_mul", check_op({r({3, 4}), r({3, 4})},
                                 [](Graph&, std::span<const Var> v) {
                                   return sub(mul(v[0], v[1]), add(v[0], v[1]));
                                 },
                                 rng));
    Tensor off = r({3, 4});
    for (double& v : off.data()) v += v < 0 ? -0.1 : 0.1;
    note("abs", check_op({off}, [](Graph&, std::span<const Var> v) { return abs(v[0]); }, rng));
    note("softplus_square_scale", check_op({r({3, 4})},
                                           [](Graph&, std::span<const Var> v) {
                                             return add_scalar(scale(softplus(square(v[0])), -0.5), 2.0);
                                           },
                                           rng));
    note("mean", check_op({r({3, 4})}, [](Graph&, std::span<const Var> v) { return mean(v[0]); }, rng));

    {
      std::mt19937_64 grng(100 + seed);
      model::Generator g(tiny(seed));
      auto params = params_of(g.parameters(), grng);
      const Tensor x = gaussian({2, 1, 8, 16}, grng), w = gaussian({2, 1, 8, 16}, grng);
      const std::vector<int> targets = {seed % 2, 1 - seed % 2};
      note("generator", grad_check_params(
                            [&](Graph& graph) { return project(g.forward(graph, graph.constant(x), targets), w); },
                            params, 1e-5, ErrorMeasure::PerTensor));
    }
    {
      std::mt19937_64 drng(200 + seed);
      model::Discriminator d(tiny(seed));
      auto params = params_of(d.parameters(), drng);
      const Tensor x = gaussian({2, 1, 8, 16}, drng);
      const std::vector<int> first = {0, 1}, second = {1, 0};
      note("discriminator",
           grad_check_params(
               [&](Graph& graph) { return sum(square(d.forward(graph, graph.constant(x), first, second))); },
               params, 1e-5, ErrorMeasure::PerTensor));
    }
  }
  const double secs = seconds_since(t0);
  double overall = 0;
  std::string which;
  for (const auto& [k, v] : worst)
    if (!(v <= overall)) {
      overall = v;
      which = k;
    }
  report(4, overall <= 1e-4 && secs < 120.0,
         "checks=" + std::to_string(worst.size()) + "x20 max_rel_err=" + fmt("%.3e", overall) + " (" + which +
             ", tol 1e-4) runtime=" + fmt("%.1f", secs) + "s (< 120s)");
}

void c5() {
  using namespace gi::ad;
  std::mt19937_64 rng(5);
  double worst = 0;
  auto dev = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };

  Graph g;
  const std::vector<int> c = {0, 1, 2, 3}, hat = {1, 2, 3, 0};
  auto x = g.constant(gaussian({4, 1, 8, 16}, rng));
  auto f = g.constant(gaussian({4, 1, 8, 16}, rng));
  objectives::DiscriminatorFn perfect = [&](Var v, std::span<const int> first, std::span<const int>) {
    const bool real = std::equal(first.begin(), first.end(), hat.begin());
    return v.graph().constant(Tensor({v.shape()[0], 1}, real ? 1.0 : 0.0));
  };
  dev(objectives::adv_loss_d(perfect, x, c, f, hat).value()[0], 0.0);
  dev(objectives::adv_loss_d_scores(g.constant(Tensor({4, 1}, 1.0)), g.constant(Tensor({4, 1}, 0.0)))
          .value()[0],
      0.0);

  objectives::GeneratorFn identity = [](Var v, std::span<const int>) { return v; };
  dev(objectives::cycle_loss(identity, x, c, hat).value()[0], 0.0);
  dev(objectives::identity_loss(identity, x, c).value()[0], 0.0);

  const objectives::LossWeights w;
  bool defaults = w.lambda_cyc == 10.0 && w.lambda_id == 5.0;
  std::uniform_real_distribution<double> ud(0.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double a = ud(rng), b = ud(rng), d = ud(rng);
    const std::uint64_t it = i % 2 == 0 ? 0 : w.id_cutoff_iterations + i;
    const double want = a + 10.0 * b + (it < w.id_cutoff_iterations ? 5.0 * d : 0.0);
    dev(objectives::full_g_value(a, b, d, w, it), want);
    dev(objectives::full_g_objective(g.constant(Tensor({1}, a)), g.constant(Tensor({1}, b)),
                                     g.constant(Tensor({1}, d)), w, it)
            .value()[0],
        want);
    dev(objectives::full_d_objective(g.constant(Tensor({1}, a))).value()[0], a);
  }
  report(5, worst <= 1e-12 && defaults,
         "max_dev=" + fmt("%.3e", worst) + " (tol 1e-12) lambda_cyc=10 lambda_id=5 " +
             (defaults ? "confirmed" : "MISMATCH"));
}

double mean_layer_similarity(const exp::ExperimentReport& r, std::uint64_t it) {
  double s = 0;
  int n = 0;
  for (const auto& row : r.at(it))
    if (row.layer.rfind("GROUP_", 0) != 0) {
      s += row.similarity;
      ++n;
    }
  return s / n;
}

double group(const exp::ExperimentReport& r, std::uint64_t it, const char* name) {
  for (const auto& row : r.at(it))
    if (row.layer == name) return row.similarity;
  return NAN;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

// Arguments select criteria by number; none runs all ten.
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int n) { return only.empty() || only.contains(n); };
  if (want(1)) c1();
  if (want(2)) c2();
  if (want(3)) c3();
  if (want(4)) c4();
  if (want(5)) c5();
  if (!(want(6) || want(7) || want(8) || want(9) || want(10))) return failures == 0 ? 0 : 1;

  config::ExperimentConfig cfg;
  cfg.train.weights.id_cutoff_iterations = cfg.train.total_iterations / 20;
  cfg.seeds = {0, 1, 2};
  const auto data_a = exp::make_dataset(cfg, cfg.data.seed);
  const auto data_b = exp::make_dataset(cfg, cfg.data.transfer_seed);

  std::vector<exp::Exp1Result> exp1;
  std::vector<double> exp1_seconds;
  for (auto seed : cfg.seeds) {
    const auto t0 = Clock::now();
    exp1.push_back(exp::run_exp1(cfg.with_seed(seed), data_a));
    exp1_seconds.push_back(seconds_since(t0));
  }

  if (want(6)) {
    const auto& run = exp1[0].run;
    const auto& recs = run.log.records;
    const bool complete = !run.diverged && recs.size() == cfg.train.total_iterations;
    const double first = complete ? run.log.mean_total_g(0, 100) : NAN;
    const double last = complete ? run.log.mean_total_g(recs.size() - 100, recs.size()) : NAN;
    bool id_zero = complete;
    for (const auto& r : recs)
      if (r.iteration >= cfg.train.weights.id_cutoff_iterations && r.id != 0.0) id_zero = false;
    report(6, complete && last <= 0.8 * first && id_zero && exp1_seconds[0] < 600.0,
           "iterations=" + std::to_string(recs.size()) + " domains=" +
               std::to_string(cfg.train.model.n_domains) + " first100=" + fmt("%.4f", first) +
               " last100=" + fmt("%.4f", last) + " ratio=" + fmt("%.3f", last / first) +
               " (<= 0.8) id_after_cutoff_zero=" + (id_zero ? "yes" : "no") +
               " runtime=" + fmt("%.1f", exp1_seconds[0]) + "s (< 600s)");
  }

  if (want(7)) {
    auto c = cfg.with_seed(0);
    c.variants = config::standard_variants();
    const auto r = exp::run_exp3(c, data_a, &exp1[0].run);
    bool all = r.variants.size() == 3;
    std::string detail;
    for (const auto& v : r.variants) {
      all = all && v.frozen_bit_equal;
      detail += v.variant.name + "{";
      for (const auto& l : v.variant.layers) detail += l + (l == *v.variant.layers.rbegin() ? "" : ",");
      detail += std::string("}=") + (v.frozen_bit_equal ? "bit-identical " : "CHANGED ");
    }
    report(7, all, detail + "over " + std::to_string(cfg.train.total_iterations) + " iterations");
  }

  if (want(8)) {
    int good = 0;
    std::string detail;
    for (const auto& e : exp1) {
      const auto its = e.report.checkpoints();
      double max_rise = -INFINITY;
      for (std::size_t k = 1; k < its.size(); ++k) {
        const auto prev = e.report.at(its[k - 1]), cur = e.report.at(its[k]);
        for (std::size_t i = 0; i < cur.size(); ++i)
          if (cur[i].layer.rfind("GROUP_", 0) != 0)
            max_rise = std::max(max_rise, cur[i].similarity - prev[i].similarity);
      }
      const auto fin = its.back();
      const double gr = group(e.report, fin, exp::kGroupR), gu = group(e.report, fin, exp::kGroupU);
      const bool ok = !e.run.diverged && max_rise <= 0.02 && gr > gu;
      good += ok;
      detail += "seed" + std::to_string(e.report.seed) + ":max_rise=" + fmt("%.4f", max_rise) +
                ",R=" + fmt("%.4f", gr) + ",U=" + fmt("%.4f", gu) + (ok ? " ok " : " no ");
    }
    report(8, good >= 2, std::to_string(good) + "/3 seeds (need >= 2) " + detail);
  }

  if (want(9)) {
    int good = 0;
    std::string detail;
    for (const auto& e : exp1) {
      const auto sc = cfg.with_seed(e.report.seed);
      const auto& base = e.run.checkpoints[e.optimal];
      const auto r = exp::run_exp2(sc, base, data_b);
      double margin = INFINITY;
      for (auto it : r.pretransfer.checkpoints())
        margin = std::min(margin, mean_layer_similarity(r.pretransfer, it) - mean_layer_similarity(r.fresh, it));
      const bool ok = !r.run.diverged && margin > 0.0;
      good += ok;
      detail += "seed" + std::to_string(e.report.seed) + ":base_it=" + std::to_string(base.iteration) +
                ",steps=" + std::to_string(r.run.final_checkpoint().iteration) +
                ",min_margin=" + fmt("%.4f", margin) + (ok ? " ok " : " no ");
    }
    report(9, good == 3, std::to_string(good) + "/3 seeds (need 3) " + detail);
  }

  if (want(10)) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "gi_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const auto tc = cfg.with_seed(0).train;
    train::Trainer first(tc, data_a);
    while (first.iteration() < 500) first.step();
    const auto mid = first.checkpoint();
    model::save_checkpoint(mid, (dir / "mid.gick").string());
    const auto loaded = model::load_checkpoint((dir / "mid.gick").string());
    const bool round_trip = model::bit_equal(mid, loaded) &&
                            model::encode_checkpoint(loaded) == slurp(dir / "mid.gick");

    train::Trainer resumed(tc, data_a, loaded);
    while (resumed.iteration() < 1000) resumed.step();
    const auto split = resumed.checkpoint();
    const model::NetworkCheckpoint* whole = nullptr;
    for (const auto& ck : exp1[0].run.checkpoints)
      if (ck.iteration == 1000) whole = &ck;
    const bool resume_equal = whole && model::bit_equal(split, *whole) &&
                              model::encode_checkpoint(split) == model::encode_checkpoint(*whole);

    std::vector<exp::ExperimentReport> reports;
    for (const auto& e : exp1) reports.push_back(e.report);
    exp::emit_csv(reports, (dir / "a.csv").string());
    const std::string first_csv = slurp(dir / "a.csv");
    std::vector<exp::ExperimentReport> rebuilt;
    for (const auto& row : exp::parse_csv(first_csv)) {
      if (rebuilt.empty() || rebuilt.back().seed != row.seed || rebuilt.back().experiment != row.experiment)
        rebuilt.push_back({row.experiment, row.seed, 0, {}});
      rebuilt.back().rows.push_back({row.checkpoint, row.layer, row.similarity});
    }
    exp::emit_csv(rebuilt, (dir / "b.csv").string());
    exp::emit_csv(reports, (dir / "c.csv").string());
    const bool csv_equal = first_csv == slurp(dir / "b.csv") && first_csv == slurp(dir / "c.csv");

    report(10, round_trip && resume_equal && csv_equal,
           std::string("checkpoint_round_trip=") + (round_trip ? "bit-exact" : "MISMATCH") +
               " split_resume_0-500-1000=" + (resume_equal ? "bit-exact" : "MISMATCH") +
               " csv_reemission=" + (csv_equal ? "byte-identical" : "MISMATCH") + " (" +
               std::to_string(first_csv.size()) + " bytes)");
    fs::remove_all(dir);
  }

  return failures == 0 ? 0 : 1;
}
