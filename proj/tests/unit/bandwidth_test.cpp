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
#include "tsnelab/bandwidth.hpp"
#include "tsnelab/neighbors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace {

using namespace tsnelab;

Dataset line(std::vector<double> xs) {
  Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = xs[i];
  return make_dataset(std::move(m));
}

Dataset triangle() {
  Matrix m(3, 2);
  m << 0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;
  return make_dataset(std::move(m));
}

// X_0 at the origin, the rest on the unit circle.
Dataset star(std::size_t n) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), 2);
  for (std::size_t k = 1; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1);
    m(static_cast<Eigen::Index>(k), 0) = std::cos(t);
    m(static_cast<Eigen::Index>(k), 1) = std::sin(t);
  }
  return make_dataset(std::move(m));
}

TEST(Perplexity, EquidistantNeighborsGiveTheirCount) {
  const Dataset tri = triangle();
  for (double s : {0.01, 0.3, 1.0, 50.0}) EXPECT_NEAR(perplexity(tri, 0, s), 2.0, 1e-12);
  const Dataset st = star(9);
  for (double s : {0.05, 1.0, 7.0}) EXPECT_NEAR(perplexity(st, 0, s), 8.0, 1e-12);
}

TEST(Perplexity, ThreePointsOnALine) {
  const Dataset x = line({0.0, 1.0, 2.0});
  EXPECT_NEAR(perplexity(x, 1, 1.0), 2.0, 1e-12);
  const auto pts = gen::points(x.points);
  const double closed = perplexity(x, 0, 1.0);
  EXPECT_NEAR(closed, oracle::perplexity_entropy(pts, 0, 1.0), 1e-10 * closed);
}

TEST(Perplexity, TinyBandwidthStaysFinite) {
  const Dataset x = line({0.0, 1.0, 2.0, 5.0});
  for (double s : {1e-3, 1e-8, 1e-150}) {
    const double pp = perplexity(x, 0, s);
    EXPECT_TRUE(std::isfinite(pp));
    EXPECT_NEAR(pp, 1.0, 1e-12);
  }
}

TEST(Perplexity, RejectsBadArguments) {
  EXPECT_THROW(perplexity(line({0.0}), 0, 1.0), std::invalid_argument);
  EXPECT_THROW(perplexity(line({0.0, 1.0}), 0, 0.0), std::invalid_argument);
  EXPECT_THROW(perplexity(line({0.0, 1.0}), 0, -1.0), std::invalid_argument);
}

TEST(Perplexity, ClosedFormMatchesEntropyOnRandomInstances) {
  gen::for_all(40, 7, [](gen::Gen& g) {
    const std::size_t n = g.index(2, 40), d = g.index(1, 3);
    const Dataset x = make_dataset(g.uniform_matrix(n, d, 0.0, 1.0));
    const auto pts = gen::points(x.points);
    const std::size_t i = g.index(0, n - 1);
    const double s = std::exp(g.uniform(std::log(0.05), std::log(2.0)));
    const double pp = perplexity(x, i, s);
    EXPECT_NEAR(pp, oracle::perplexity_entropy(pts, i, s), 1e-10 * pp);
  });
}

TEST(Perplexity, StrictlyIncreasingOnALogGrid) {
  gen::for_all(20, 8, [](gen::Gen& g) {
    const std::size_t n = g.index(3, 60), d = g.index(1, 3);
    const Dataset x = make_dataset(g.uniform_matrix(n, d, 0.0, 1.0));
    const std::size_t i = g.index(0, n - 1);
    double rmin = INFINITY, rmax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const double r = std::sqrt(squared_distance(x.point(i).data(), x.point(k).data(), d));
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    double prev = 0.0;
    for (int s = 0; s < 50; ++s) {
      const double sigma = 0.2 * rmin * std::pow(25.0 * rmax / rmin, s / 49.0);
      const double pp = perplexity(x, i, sigma);
      if (prev > 1.0 + 1e-12) {
        EXPECT_GT(pp, prev) << "sigma " << sigma;
      } else {
        EXPECT_GE(pp, prev);
      }
      EXPECT_GE(pp, 1.0 - 1e-9);
      EXPECT_LE(pp, static_cast<double>(n - 1) + 1e-9);
      prev = pp;
    }
  });
}

TEST(Perplexity, LocalEvaluatorAgreesWithTheDenseOne) {
  gen::for_all(10, 9, [](gen::Gen& g) {
    const std::size_t n = g.index(50, 400), d = g.index(1, 2);
    const Dataset x = make_dataset(g.uniform_matrix(n, d, 0.0, 1.0));
    const NeighborGrid grid(x.points, 0.05);
    const std::size_t i = g.index(0, n - 1);
    LocalPerplexity local(x, grid, i);
    for (double s : {0.5, 0.1, 0.02, 0.05, 0.001, 0.3}) {
      const double dense = perplexity(x, i, s);
      EXPECT_NEAR(local(s), dense, 1e-12 * dense) << "sigma " << s;
    }
  });
}

TEST(SolveBandwidth, ConstantPerplexityReturnsImmediately) {
  const Dataset tri = triangle();
  const double tol = 1e-8;
  const double s = solve_bandwidth(tri, 0, {2.0}, 0.7, tol);
  EXPECT_LE(std::abs(perplexity(tri, 0, s) - 2.0), tol * 2.0);
}

TEST(SolveBandwidth, MatchesDenseScanOracle) {
  const Dataset x = line({0.0, 1.0, 2.0});
  const auto pts = gen::points(x.points);
  const double tol = 1e-9;
  const double s = solve_bandwidth(x, 0, {1.5}, 1.0, tol);
  EXPECT_NEAR(perplexity(x, 0, s), 1.5, tol * 1.5);
  // First grid point where the entropy perplexity crosses the target.
  double crossing = 0.0;
  for (int k = 1; k <= 200000; ++k) {
    const double sigma = 1e-5 * k;
    if (oracle::perplexity_entropy(pts, 0, sigma) >= 1.5) {
      crossing = sigma;
      break;
    }
  }
  EXPECT_NEAR(s, crossing, 1e-5);
}

TEST(SolveBandwidth, UnachievableTargetsNameTheRange) {
  const Dataset x = line({0.0, 1.0, 2.0});
  try {
    solve_bandwidth(x, 0, {2.5}, 1.0, 1e-6);
    FAIL() << "expected UnachievableTarget";
  } catch (const UnachievableTarget& e) {
    EXPECT_NE(std::string(e.what()).find("unachievable"), std::string::npos);
    EXPECT_DOUBLE_EQ(e.feasible_lo, 1.0);
    EXPECT_DOUBLE_EQ(e.feasible_hi, 2.0);
  }
  EXPECT_THROW(solve_bandwidth(x, 0, {1.0}, 1.0, 1e-6), UnachievableTarget);
  EXPECT_THROW(solve_bandwidth(x, 0, {0.5}, 1.0, 1e-6), UnachievableTarget);
}

TEST(SolveBandwidth, ScaledTargetResolvesAgainstNAndH) {
  EXPECT_DOUBLE_EQ((PerplexityTarget{2.0, TargetConvention::scaled}.resolve(100, 2, 0.1)), 2.0);
  EXPECT_DOUBLE_EQ((PerplexityTarget{3.0, TargetConvention::raw}.resolve(100, 2, 0.1)), 3.0);
}

TEST(SolveBandwidth, ReportsNonConvergence) {
  const Dataset x = line({0.0, 1.0, 2.0, 4.0});
  SolveOptions few;
  few.max_bisection_steps = 2;
  EXPECT_THROW(solve_bandwidth(x, 0, {1.7}, 1.0, 1e-14, few), ConvergenceError);
}

TEST(Kde, SingleKernelAtItsCenter) {
  const Dataset one = make_dataset(Matrix::Constant(1, 2, 0.3));
  const double x[2] = {0.3, 0.3};
  const double h = 0.2;
  EXPECT_NEAR(kde(one, h, x), 1.0 / (2.0 * std::numbers::pi * h * h), 1e-12);
}

TEST(Kde, VanishesFarOutsideTheDomain) {
  const Dataset data = sample(Density::uniform(Domain::unit(1)), 1000, 1);
  const double far[1] = {10.0};
  EXPECT_LE(kde(data, 0.1, far), 1e-12);
}

TEST(Kde, ConsistentAtAnInteriorPoint) {
  const std::size_t n = 100000;
  const double h = std::pow(static_cast<double>(n), -1.0 / 3.0);
  std::vector<double> est;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double x[1] = {0.5};
    est.push_back(kde(sample(Density::uniform(Domain::unit(1)), n, seed), h, x));
  }
  EXPECT_NEAR(oracle::median(est), 1.0, 0.05);
}

TEST(Kde, MedianErrorDecreasesWithN) {
  double prev = INFINITY;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    const double h = std::pow(static_cast<double>(n), -1.0 / 3.0);
    std::vector<double> err;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const double x[1] = {0.5};
      err.push_back(std::abs(kde(sample(Density::uniform(Domain::unit(1)), n, 50 + seed), h, x) - 1.0));
    }
    const double med = oracle::median(err);
    EXPECT_LT(med, prev) << "n " << n;
    prev = med;
  }
}

TEST(LimitBandwidth, KnownValues) {
  const double c[2] = {0.2, 0.9};
  EXPECT_NEAR(limit_bandwidth(Density::uniform(Domain::unit(2)), 1.0, c), 0.241971, 1e-6);
  const double x[1] = {0.4};
  EXPECT_NEAR(limit_bandwidth(Density::uniform(Domain::unit(1)), 2.0, x), 0.483941, 1e-6);
}

TEST(LimitBandwidth, TileRatioFollowsTheDensityRatio) {
  const Density rho = Density::tiles(Domain::unit(1), {2}, {2.0 / 3.0, 4.0 / 3.0});
  const double left[1] = {0.25}, right[1] = {0.75};
  EXPECT_NEAR(limit_bandwidth(rho, 1.0, left) / limit_bandwidth(rho, 1.0, right), 2.0, 1e-12);
  const double out[1] = {1.25};
  EXPECT_THROW(limit_bandwidth(rho, 1.0, out), DomainError);
}

TEST(CalibrateProfile, HitsTheScaledTargetAtEveryPoint) {
  const std::size_t n = 4096;
  const Dataset data = sample(Density::uniform(Domain::unit(1)), n, 3);
  const double h = std::pow(static_cast<double>(n), -1.0 / 3.0), tol = 1e-6;
  const BandwidthProfile p = calibrate_profile(data, 1.0, h, tol);
  ASSERT_EQ(p.size(), n);
  EXPECT_EQ(p.mode, ProfileMode::calibrated);
  EXPECT_DOUBLE_EQ(p.h, h);
  const double target = static_cast<double>(n) * h;
  for (std::size_t i = 0; i < n; i += 97) {
    EXPECT_GT(p.sigmas[i], 0.0);
    EXPECT_LE(std::abs(perplexity(data, i, p.sigmas[i]) - target), 2.0 * tol * target);
  }
}

double median_interior_error(std::size_t n, std::uint64_t seed) {
  const Density rho = Density::uniform(Domain::unit(1));
  const Dataset data = sample(rho, n, seed);
  const double h = std::pow(static_cast<double>(n), -1.0 / 3.0);
  const BandwidthProfile p = calibrate_profile(data, 1.0, h, 1e-5);
  std::vector<double> err;
  for (std::size_t i = 0; i < n; ++i)
    if (rho.domain().distance_to_boundary(data.point(i)) > 0.1)
      err.push_back(std::abs(p.normalized(i) - 1.0 / std::sqrt(2.0 * std::numbers::pi * std::numbers::e)));
  return oracle::median(err);
}

TEST(CalibrateProfile, NormalizedBandwidthApproachesTheLimit) {
  EXPECT_LT(median_interior_error(32768, 21), median_interior_error(4096, 21));
}

TEST(CalibrateProfile, UnachievableScaledTarget) {
  const Dataset data = sample(Density::uniform(Domain::unit(1)), 64, 4);
  // kappa * n * h = 80 > n - 1.
  EXPECT_THROW(calibrate_profile(data, 1.25, 1.0, 1e-6), UnachievableTarget);
  try {
    calibrate_profile(data, 1.25, 1.0, 1e-6);
  } catch (const UnachievableTarget& e) {
    EXPECT_NE(std::string(e.what()).find("point 0"), std::string::npos);
  }
}

TEST(AnalyticProfile, UsesTheLimitingBandwidth) {
  const Density rho = Density::tiles(Domain::unit(1), {2}, {0.5, 1.5});
  const Dataset data = sample(rho, 200, 6);
  const BandwidthProfile p = analytic_profile(data, rho, 2.0, 0.05);
  EXPECT_EQ(p.mode, ProfileMode::analytic);
  for (std::size_t i = 0; i < data.size(); ++i)
    EXPECT_EQ(p.sigmas[i], 0.05 * limit_bandwidth(rho, 2.0, data.point(i)));
}

}  // namespace
