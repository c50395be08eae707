// Copyright 2026 The tsne-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "generators.hpp"
#include "oracles.hpp"
#include "tsnelab/experiments.hpp"
#include "tsnelab/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace {

using namespace tsnelab;

const double kSigmaUniform = 1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::e);

SweepConfig base_config(std::size_t d = 1) {
  SweepConfig c;
  c.density = Density::uniform(Domain::unit(d));
  c.n_values = {64, 128};
  c.seeds = {1, 2, 3};
  return c;
}

OptimizerConfig small_optimizer(std::size_t m, std::size_t steps) {
  OptimizerConfig o;
  o.steps = steps;
  o.embedding_dim = m;
  o.init.kind = InitKind::pca;
  o.init.scale = 1e-2;
  return o;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void expect_complete(const SweepResult& r, const SweepConfig& c, std::size_t cells_per_seed) {
  EXPECT_EQ(r.rows.size(), cells_per_seed * c.seeds.size() * r.metrics.size());
  for (std::size_t k = 1; k < r.rows.size(); ++k)
    EXPECT_TRUE(r.rows[k - 1].n < r.rows[k].n ||
                (r.rows[k - 1].n == r.rows[k].n && r.rows[k - 1].seed <= r.rows[k].seed));
}

TEST(Summarize, MatchesInterpolatedQuantiles) {
  gen::for_all(50, 60, [](gen::Gen& g) {
    std::vector<double> v(g.index(1, 25));
    for (auto& x : v) x = g.normal();
    const auto a = summarize(v);
    EXPECT_EQ(a.count, v.size());
    EXPECT_DOUBLE_EQ(a.median, oracle::median(v));
    EXPECT_DOUBLE_EQ(a.q1, oracle::quantile(v, 0.25));
    EXPECT_DOUBLE_EQ(a.q3, oracle::quantile(v, 0.75));
    EXPECT_DOUBLE_EQ(a.iqr, a.q3 - a.q1);
  });
  const auto a = summarize({1.0, NAN, 3.0, INFINITY});
  EXPECT_EQ(a.count, 2u);
  EXPECT_DOUBLE_EQ(a.median, 2.0);
  EXPECT_TRUE(std::isnan(summarize({}).median));
}

TEST(SweepConfig, ValidationAndJson) {
  SweepConfig c = base_config(2);
  c.map = SmoothMap::identity(2);
  c.optimizer = small_optimizer(2, 10);
  c.pinned_h = 0.25;
  c.grid_sizes = {8, 16};
  const SweepConfig back = SweepConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_DOUBLE_EQ(back.h_for(1000), 0.25);
  EXPECT_NEAR(base_config(2).h_for(1000), 0.1, 1e-15);
  EXPECT_NEAR(base_config(1).margin(), 0.1, 1e-15);

  auto bad = base_config();
  bad.n_values = {128, 64};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = base_config();
  bad.seeds.clear();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = base_config();
  bad.kappa = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(run_experiment("nope", base_config()), std::invalid_argument);
}

TEST(ExpBandwidth, UniformErrorIsDeviationFromTheConstant) {
  SweepConfig c = base_config();
  c.n_values = {256, 1024};
  const auto r = exp_bandwidth(c);
  expect_complete(r, c, 2);
  EXPECT_NEAR(r.extras["sigma_kappa_uniform"].get<double>(), kSigmaUniform, 1e-15);
  for (const std::size_t n : c.n_values) {
    const Dataset data = sample(c.density, n, derive_seed(c.seeds[0], n));
    const auto p = calibrate_profile(data, c.kappa, c.h_for(n), c.calibration_tol);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (data.points(static_cast<Eigen::Index>(i), 0) > 0.1 && data.points(static_cast<Eigen::Index>(i), 0) < 0.9)
        sup = std::max(sup, std::abs(p.normalized(i) - kSigmaUniform));
    for (const auto& row : r.rows)
      if (row.n == n && row.seed == c.seeds[0] && row.metric == "sup_error") {
        EXPECT_DOUBLE_EQ(row.value, sup);
      }
  }
}

TEST(ExpBandwidth, TwoTileBandwidthsAreOrdered) {
  SweepConfig c = base_config();
  c.density = Density::tiles(Domain::unit(1), {2}, {0.5, 1.5});
  c.n_values = {512, 2048};
  const auto r = exp_bandwidth(c);
  const auto low = r.medians("tile0_median_sigma_hat"), high = r.medians("tile1_median_sigma_hat");
  ASSERT_EQ(low.size(), 2u);
  for (std::size_t k = 0; k < low.size(); ++k) EXPECT_GT(low[k], high[k]);
}

TEST(ExpConsistency, ConstantMap) {
  SweepConfig c = base_config();
  c.map = SmoothMap::constant(1, Vector::Constant(1, 2.0));
  const auto r = exp_consistency(c);
  expect_complete(r, c, 2);
  EXPECT_EQ(r.extras["dirichlet_target"].get<double>(), 0.0);
  for (const auto& row : r.rows) {
    const double n = static_cast<double>(row.n);
    if (row.metric == "attraction_error") {
      EXPECT_EQ(row.value, 0.0);
    }
    if (row.metric == "repulsion_error") {
      EXPECT_NEAR(row.value, std::abs(std::log((n * n - n) / (n * n))), 1e-14);
    }
  }
}

TEST(ExpConsistency, SineTarget) {
  SweepConfig c = base_config();
  c.map = SmoothMap::sinusoid(Vector::Ones(1), Matrix::Constant(1, 1, std::numbers::pi), Vector::Zero(1));
  c.n_values = {256};
  c.seeds = {4};
  const auto r = exp_consistency(c);
  EXPECT_NEAR(r.extras["dirichlet_target"].get<double>(), std::numbers::pi * std::numbers::pi / 2.0 * kSigmaUniform * kSigmaUniform, 1e-4);
}

TEST(ExpIllposed, ReferenceAttractionShrinksAndRunsAreRecorded) {
  SweepConfig c = base_config(2);
  c.n_values = {64, 128, 256};
  c.seeds = {1, 2};
  c.optimizer = small_optimizer(2, 60);
  const auto r = exp_illposed(c);
  expect_complete(r, c, 3);
  const auto ref = r.medians("reference_attraction");
  for (std::size_t k = 1; k < ref.size(); ++k) EXPECT_LT(ref[k], ref[k - 1]);
  for (double v : r.medians("diverged")) EXPECT_EQ(v, 0.0);
}

TEST(ExpIllposed, DivergenceIsRecordedNotThrown) {
  SweepConfig c = base_config(2);
  c.n_values = {64};
  c.seeds = {1};
  c.optimizer = small_optimizer(2, 400);
  c.optimizer->learning_rate = 1e6;
  c.optimizer->momentum = 0.9;
  c.optimizer->divergence_window = 3;
  const auto r = exp_illposed(c);
  EXPECT_EQ(r.medians("diverged")[0], 1.0);
}

TEST(ExpRescaled, LargeKappaCollapsesBothMinimizers) {
  SweepConfig c = base_config();
  c.kappa = 1e4;
  c.n_values = {64, 128};
  c.seeds = {1};
  c.optimizer = small_optimizer(1, 300);
  c.grid_sizes = {32};
  const auto r = exp_rescaled(c);
  expect_complete(r, c, 2);
  EXPECT_LT(r.medians("rms_spread").back(), 0.05);
  EXPECT_LT(r.extras["continuum"]["rms_spread"].get<double>(), 0.05);
}

TEST(ExpElResidual, OneAndTwoDimensions) {
  for (std::size_t d : {1u, 2u}) {
    SweepConfig c = base_config(d);
    c.seeds = {1};
    c.grid_sizes = d == 1 ? std::vector<std::size_t>{16, 32} : std::vector<std::size_t>{6, 10};
    OptimizerConfig o = small_optimizer(d, 4000);
    o.init.scale = 0.1;
    o.learning_rate = 1.0;
    o.momentum = 0.9;
    o.convergence_tol = 1e-12;
    o.record_every = 100;
    c.optimizer = o;
    const auto r = exp_el_residual(c);
    expect_complete(r, c, 2);
    for (const auto& row : r.rows) {
      if (row.metric == "residual_ratio") {
        EXPECT_LE(row.value, 1e-2) << d << " " << row.n;
      }
      if (row.metric == "boundary_flux") {
        EXPECT_LE(row.value, 1e-8);
      }
    }
  }
}

TEST(Experiments, RerunsAndThreadsGiveIdenticalOutputs) {
  SweepConfig c = base_config(2);
  c.n_values = {48, 96};
  c.seeds = {5, 6, 7};
  c.optimizer = small_optimizer(2, 30);
  const std::string once = to_csv(exp_illposed(c));
  EXPECT_EQ(once, to_csv(exp_illposed(c)));
  c.threads = 3;
  EXPECT_EQ(once, to_csv(exp_illposed(c)));
}

TEST(Experiments, WritesCsvSvgAndMeta) {
  SweepConfig c = base_config();
  c.name = "bw_small";
  const auto r = exp_bandwidth(c);
  const auto dir = std::filesystem::temp_directory_path() / "tsnelab_exp_test";
  std::filesystem::remove_all(dir);
  write_outputs(r, c, dir);
  EXPECT_EQ(read_file(dir / "bw_small.csv"), to_csv(r));
  const std::string svg = read_file(dir / "bw_small.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  const auto meta = read_json(dir / "bw_small.meta.json");
  EXPECT_EQ(meta["config"], c.to_json());
  EXPECT_EQ(meta["seeds"], nlohmann::json(c.seeds));
  EXPECT_EQ(meta["version"], version());
  const auto table = read_csv(dir / "bw_small.csv");
  EXPECT_EQ(table.header, (std::vector<std::string>{"n", "seed", "metric", "value"}));
  EXPECT_EQ(table.rows.size(), r.rows.size());
  std::filesystem::remove_all(dir);
}

}  // namespace
