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
#include "tsnelab/optimize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace {

using namespace tsnelab;

Dataset cloud(gen::Gen& g, std::size_t n, std::size_t d) { return make_dataset(g.uniform_matrix(n, d, 0.0, 1.0)); }

OptimizerConfig short_run(std::size_t steps, std::uint64_t seed) {
  OptimizerConfig c;
  c.steps = steps;
  c.record_every = 1;
  c.init.seed = seed;
  return c;
}

TEST(OptimizerConfig, ValidatesAndRoundTrips) {
  OptimizerConfig c;
  c.steps = 200;
  c.exaggeration_steps = 40;
  c.exaggeration_factor = 12.0;
  c.init.kind = InitKind::pca;
  c.init.scale = 1e-4;
  c.repulsion = RepulsionSum::inclusive;
  const OptimizerConfig back = OptimizerConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());

  auto bad = c;
  bad.exaggeration_steps = 201;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.momentum = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.exaggeration_factor = 0.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.learning_rate = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Geometry, DiameterAndSpread) {
  const Matrix y = (Matrix(3, 2) << 0.0, 0.0, 3.0, 4.0, 0.0, 4.0).finished();
  EXPECT_DOUBLE_EQ(diameter(y), 5.0);
  const double cx = 1.0, cy = 8.0 / 3.0;
  const double ms = (cx * cx + cy * cy + (3 - cx) * (3 - cx) + (4 - cy) * (4 - cy) + cx * cx + (4 - cy) * (4 - cy)) / 3.0;
  EXPECT_NEAR(rms_spread(y), std::sqrt(ms), 1e-15);
}

// Two points under the inclusive normalizer: the objective in the gap s is
// w log(1 + s^2) + log((2 / (1 + s^2) + 2) / 4).
double two_point_gap(Variant v, double h) {
  const Dataset x = make_dataset((Matrix(2, 1) << 0.0, 1.0).finished());
  OptimizerConfig c;
  c.steps = 4000;
  c.learning_rate = 0.5;
  c.embedding_dim = 1;
  c.init.kind = InitKind::given;
  c.init.given = (Matrix(2, 1) << -0.3, 0.3).finished();
  c.repulsion = RepulsionSum::inclusive;
  c.convergence_tol = 1e-12;
  const auto r = minimize_discrete(x, uniform_profile(2, 0.5, h), v, c);
  return std::abs(r.embedding.y(0, 0) - r.embedding.y(1, 0));
}

double two_point_oracle(double w) {
  return oracle::golden_min(
      [w](double s) { return w * std::log1p(s * s) + std::log((2.0 / (1.0 + s * s) + 2.0) / 4.0); }, 0.0, 10.0,
      1e-10);
}

TEST(MinimizeDiscrete, TwoPointsMatchLineSearch) {
  EXPECT_NEAR(two_point_gap(Variant::classic, 1.0), two_point_oracle(1.0), 1e-3);
  // Weight 1/4 balances at (1 + s^2) = 3.
  const double s = two_point_oracle(0.25);
  EXPECT_NEAR(s, std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(two_point_gap(Variant::rescaled, 2.0), s, 1e-3);
}

TEST(MinimizeDiscrete, EmptyExaggerationWindowIsInert) {
  gen::Gen g(50);
  const Dataset x = cloud(g, 40, 2);
  const auto p = uniform_profile(40, 0.2);
  auto c = short_run(60, 7);
  const auto a = minimize_discrete(x, p, Variant::classic, c);
  c.exaggeration_factor = 4.0;
  const auto b = minimize_discrete(x, p, Variant::classic, c);
  EXPECT_EQ(a.embedding.y, b.embedding.y);
}

TEST(MinimizeDiscrete, RescaledWithUnitScaleIsClassic) {
  gen::Gen g(51);
  const Dataset x = cloud(g, 40, 2);
  const auto p = uniform_profile(40, 0.2, 1.0);
  const auto c = short_run(60, 8);
  const auto a = minimize_discrete(x, p, Variant::classic, c);
  const auto b = minimize_discrete(x, p, Variant::rescaled, c);
  EXPECT_EQ(a.embedding.y, b.embedding.y);
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t k = 0; k < a.trace.records.size(); ++k) EXPECT_EQ(a.trace.records[k].total, b.trace.records[k].total);
}

TEST(MinimizeDiscrete, TranslatingTheInitTranslatesTheTrajectory) {
  gen::for_all(5, 52, [](gen::Gen& g) {
    const std::size_t n = g.index(10, 40);
    const Dataset x = cloud(g, n, 2);
    BandwidthProfile p;
    p.sigmas = g.sigmas(n, 0.1, 0.3);
    p.h = g.uniform(0.2, 1.0);
    const Variant v = g.coin() ? Variant::classic : Variant::rescaled;
    auto c = short_run(50, 0);
    c.init.kind = InitKind::given;
    c.init.given = g.normal_matrix(n, 2, 1.0);
    const auto a = minimize_discrete(x, p, v, c);
    const Eigen::RowVector2d shift(0.5, -0.25);
    c.init.given = c.init.given->rowwise() + shift;
    const auto b = minimize_discrete(x, p, v, c);
    EXPECT_LE(((b.embedding.y.rowwise() - shift) - a.embedding.y).cwiseAbs().maxCoeff(), 1e-9);
    for (std::size_t k = 0; k < a.trace.records.size(); ++k)
      EXPECT_NEAR(a.trace.records[k].total, b.trace.records[k].total,
                  1e-12 * std::max(1.0, std::abs(a.trace.records[k].total)));
  });
}

TEST(MinimizeDiscrete, ExaggerationScalesTheAttractionGradient) {
  gen::Gen g(53);
  const std::size_t n = 30;
  const Dataset x = cloud(g, n, 2);
  BandwidthProfile p = uniform_profile(n, 0.2, 0.5);
  const DiscreteEnergy energy(x, p);
  const Matrix y0 = g.normal_matrix(n, 2, 0.5);
  for (auto v : {Variant::classic, Variant::rescaled}) {
    OptimizerConfig c;
    c.steps = 1;
    c.momentum = 0.0;
    c.learning_rate = 0.3;
    c.exaggeration_factor = 6.0;
    c.exaggeration_steps = 1;
    const auto r = minimize_discrete(energy, y0, v, c);
    const auto ev = energy.evaluate(y0, false, true);
    const double w = energy.attraction_weight(v);
    const Matrix applied = 6.0 * w * ev.grad_attract + ev.grad_repulse;
    const Matrix expect = y0 - c.learning_rate * static_cast<double>(n) / w * applied;
    EXPECT_LE((r.embedding.y - expect).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MinimizeDiscrete, TraceIsFiniteAndOrdered) {
  gen::Gen g(54);
  const Dataset x = cloud(g, 50, 2);
  auto c = short_run(100, 3);
  c.record_every = 10;
  c.exaggeration_factor = 4.0;
  c.exaggeration_steps = 20;
  const auto r = minimize_discrete(x, uniform_profile(50, 0.15), Variant::classic, c);
  ASSERT_FALSE(r.trace.records.empty());
  for (std::size_t k = 0; k < r.trace.records.size(); ++k) {
    const auto& t = r.trace.records[k];
    EXPECT_TRUE(std::isfinite(t.total) && std::isfinite(t.grad_norm) && std::isfinite(t.diameter));
    EXPECT_NEAR(t.total, t.attract + t.repulse, 1e-12 * std::max(1.0, std::abs(t.total)));
    if (k) {
      EXPECT_GT(t.step, r.trace.records[k - 1].step);
    }
  }
}

TEST(MinimizeDiscrete, DescentIsMonotoneAfterExaggeration) {
  std::size_t checked = 0, down = 0;
  gen::for_all(20, 55, [&](gen::Gen& g) {
    const std::size_t n = g.index(30, 80);
    const Dataset x = cloud(g, n, 2);
    BandwidthProfile p;
    p.sigmas = g.sigmas(n, 0.05, 0.2);
    p.h = g.uniform(0.2, 1.0);
    OptimizerConfig c;
    c.steps = 300;
    c.exaggeration_factor = 4.0;
    c.exaggeration_steps = 50;
    c.init.seed = g.seed();
    const auto r = minimize_discrete(x, p, g.coin() ? Variant::classic : Variant::rescaled, c);
    for (std::size_t k = 1; k < r.trace.records.size(); ++k) {
      if (r.trace.records[k - 1].step < c.exaggeration_steps) continue;
      ++checked;
      down += r.trace.records[k].total <= r.trace.records[k - 1].total;
    }
  });
  ASSERT_GT(checked, 0u);
  EXPECT_GE(static_cast<double>(down), 0.95 * static_cast<double>(checked));
}

TEST(MinimizeDiscrete, StopsAtConvergenceAndReportsDivergence) {
  gen::Gen g(56);
  const Dataset x = cloud(g, 20, 2);
  auto c = short_run(5000, 1);
  c.convergence_tol = 1e-3;
  const auto r = minimize_discrete(x, uniform_profile(20, 0.3), Variant::classic, c);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_LT(r.trace.steps_taken, 5000u);

  c.convergence_tol = 1e-12;
  c.learning_rate = 1e6;
  c.momentum = 0.9;
  c.divergence_window = 3;
  EXPECT_THROW(minimize_discrete(x, uniform_profile(20, 0.3), Variant::classic, c), DivergenceError);
}

TEST(MinimizeDiscrete, RoundoffAtTheMinimumIsNotDivergence) {
  const Dataset x = sample(Density::uniform(Domain::unit(1)), 128, 0);
  const auto p = calibrate_profile(x, 1.0, std::pow(128.0, -0.5), 1e-5);
  OptimizerConfig c;
  c.steps = 3000;
  c.momentum = 0.97;
  c.embedding_dim = 1;
  c.convergence_tol = 1e-300;
  c.energy_every = 10;
  c.init.kind = InitKind::pca;
  c.init.scale = 0.3;
  const auto r = minimize_discrete(x, p, Variant::rescaled, c);
  EXPECT_EQ(r.trace.steps_taken, 3000u);
  EXPECT_LT(r.trace.records.back().grad_norm, 1e-10);
}

OptimizerConfig grid_run(std::size_t steps) {
  OptimizerConfig c;
  c.steps = steps;
  c.embedding_dim = 1;
  c.learning_rate = 1.0;
  c.momentum = 0.9;
  c.init.kind = InitKind::pca;
  c.init.scale = 0.1;
  c.record_every = 100;
  c.convergence_tol = 1e-12;
  return c;
}

TEST(MinimizeGridmap, HugeKappaCollapses) {
  const Density rho = Density::uniform(Domain::unit(1));
  const QuadratureGrid grid(rho.domain(), {32});
  const auto r = minimize_gridmap(rho, 1e6, grid, grid_run(2000));
  EXPECT_LE(weighted_rms_spread(r.map, node_density(rho, grid)), 1e-3);
}

TEST(MinimizeGridmap, BeatsTheBestLinearMapAndIsCentered) {
  const Density rho = Density::uniform(Domain::unit(1));
  const QuadratureGrid grid(rho.domain(), {64});
  const auto r = minimize_gridmap(rho, 1.0, grid, grid_run(6000));
  const auto w = node_density(rho, grid);
  EXPECT_LE(std::abs(weighted_mean(r.map, w)(0)), 1e-10);
  auto energy_of = [&](const GridMap& t) { return gridmap_objective(rho, t, 1.0, false).total(); };
  const double best = oracle::golden_min(
      [&](double s) { return energy_of(GridMap::sample(SmoothMap::identity(1).scaled(s), grid)); }, 0.0, 5.0, 1e-8);
  EXPECT_LE(energy_of(r.map), energy_of(GridMap::sample(SmoothMap::identity(1).scaled(best), grid)));

  OptimizerConfig c = grid_run(1);
  const GridMap start(grid, initial_gridmap(grid, c));
  const double r0 = el_residual(start, rho, 1.0).cwiseAbs().maxCoeff();
  EXPECT_LE(el_residual(r.map, rho, 1.0).cwiseAbs().maxCoeff(), 1e-2 * r0);
}

TEST(MinimizeGridmap, CentersTwoDimensionalMaps) {
  const Density rho = Density::gaussian_mixture(Domain::unit(2), {{{0.3, 0.6}, {0.4, 0.5}, 1.0}});
  const QuadratureGrid grid(rho.domain(), {12, 12});
  OptimizerConfig c = grid_run(300);
  c.embedding_dim = 2;
  const auto r = minimize_gridmap(rho, 1.0, grid, c);
  EXPECT_LE(weighted_mean(r.map, node_density(rho, grid)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gradcheck, Examples) {
  for (auto t : {GradTarget::discrete_classic, GradTarget::discrete_rescaled, GradTarget::gridmap}) {
    const auto fine = gradcheck(t, 1, 1e-5);
    EXPECT_TRUE(fine.pass) << to_string(t) << " " << fine.max_rel_error;
    EXPECT_LE(fine.max_rel_error, 1e-5);
    EXPECT_GT(gradcheck(t, 1, 1e-1).max_rel_error, fine.max_rel_error);
    EXPECT_EQ(grad_target_from_string(to_string(t)), t);
  }
  EXPECT_THROW(gradcheck(GradTarget::gridmap, 1, 0.0), std::invalid_argument);
}

}  // namespace
