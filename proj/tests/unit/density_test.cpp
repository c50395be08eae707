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
#include "tsnelab/density.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace {

using namespace tsnelab;

Density two_tiles() { return Density::tiles(Domain::unit(1), {2}, {2.0 / 3.0, 4.0 / 3.0}); }

Density centered_gaussian() {
  return Density::gaussian_mixture(Domain::unit(1), {{{0.5}, {0.25}, 1.0}});
}

double eval1(const Density& rho, double x) {
  const double p[1] = {x};
  return rho(p);
}

TEST(Domain, RejectsEmptyOrInvertedBoxes) {
  EXPECT_THROW(Domain({0.0}, {0.0}), std::invalid_argument);
  EXPECT_THROW(Domain({1.0, 0.0}, {0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(Domain({}, {}), std::invalid_argument);
  EXPECT_THROW(Domain({0.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Domain, ContainmentAndBoundaryDistance) {
  const Domain box({0.0, -1.0}, {2.0, 1.0});
  const double inside[2] = {0.5, 0.2}, outside[2] = {2.5, 0.0};
  EXPECT_TRUE(box.contains(inside));
  EXPECT_FALSE(box.contains(outside));
  EXPECT_DOUBLE_EQ(box.distance_to_boundary(inside), 0.5);
  EXPECT_DOUBLE_EQ(box.volume(), 4.0);
  EXPECT_DOUBLE_EQ(box.diameter(), std::sqrt(8.0));
}

TEST(EvalDensity, UniformOnUnitSquareIsOne) {
  const Density rho = Density::uniform(Domain::unit(2));
  const double x[2] = {0.3, 0.7};
  EXPECT_DOUBLE_EQ(rho(x), 1.0);
}

TEST(EvalDensity, TwoTilesTakeTheirValues) {
  const Density rho = two_tiles();
  EXPECT_DOUBLE_EQ(eval1(rho, 0.25), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(eval1(rho, 0.75), 4.0 / 3.0);
}

TEST(EvalDensity, TruncatedGaussianPeaksAtMeanAndHasUnitMass) {
  const Density rho = centered_gaussian();
  const double peak = eval1(rho, 0.5);
  for (int k = 0; k <= 1000; ++k) EXPECT_LE(eval1(rho, k / 1000.0), peak);
  const double mass = oracle::simpson([&](double x) { return eval1(rho, x); }, 0.0, 1.0, 2000);
  EXPECT_NEAR(mass, 1.0, 1e-6);
}

TEST(EvalDensity, OutsideTheDomainIsADomainError) {
  const Density rho = Density::uniform(Domain::unit(1));
  EXPECT_THROW(eval1(rho, 1.5), DomainError);
  EXPECT_THROW(eval1(rho, -1e-9), DomainError);
}

TEST(EvalDensity, MixturesIntegrateToOneInTwoDimensions) {
  const Density rho = Density::gaussian_mixture(
      Domain({-1.0, 0.0}, {1.0, 2.0}), {{{0.0, 1.0}, {0.3, 0.5}, 2.0}, {{0.8, 0.2}, {0.4, 0.2}, 1.0}});
  const double mass = oracle::simpson2(
      [&](double a, double b) {
        const double x[2] = {a, b};
        return rho(x);
      },
      -1.0, 1.0, 0.0, 2.0, 200);
  EXPECT_NEAR(mass, 1.0, 1e-6);
  EXPECT_NEAR(rho.quadrature_mass(), 1.0, 1e-10);
}

TEST(EvalDensity, TilesAreRescaledToUnitMass) {
  const Density rho = Density::tiles(Domain({0.0}, {2.0}), {2}, {1.0, 3.0});
  EXPECT_DOUBLE_EQ(eval1(rho, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(eval1(rho, 1.5), 0.75);
  EXPECT_DOUBLE_EQ(rho.normalization(), 4.0);
}

TEST(EvalDensity, RejectsNonPositiveTiles) {
  EXPECT_THROW(Density::tiles(Domain::unit(1), {2}, {1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(Density::tiles(Domain::unit(1), {3}, {1.0, 1.0}), std::invalid_argument);
}

TEST(DensityBounds, UniformAndTiles) {
  const auto u = Density::uniform(Domain::unit(2)).bounds();
  EXPECT_DOUBLE_EQ(u.lower, 1.0);
  EXPECT_DOUBLE_EQ(u.upper, 1.0);
  const auto t = two_tiles().bounds();
  EXPECT_DOUBLE_EQ(t.lower, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(t.upper, 4.0 / 3.0);
}

TEST(DensityBounds, TruncatedGaussianMatchesDenseScan) {
  const Density rho = centered_gaussian();
  double lo = INFINITY, hi = 0.0;
  for (int k = 0; k <= 100000; ++k) {
    const double v = eval1(rho, k / 100000.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_NEAR(rho.bounds().lower, lo, 1e-6);
  EXPECT_NEAR(rho.bounds().upper, hi, 1e-6);
}

TEST(DensityBounds, BracketEvaluationAtRandomPoints) {
  gen::for_all(12, 101, [](gen::Gen& g) {
    const std::size_t d = g.index(1, 3);
    const Density rho = g.density(d);
    const auto b = rho.bounds();
    EXPECT_GT(b.lower, 0.0);
    std::vector<double> x(d);
    for (int s = 0; s < 10000; ++s) {
      for (std::size_t k = 0; k < d; ++k)
        x[k] = g.uniform(rho.domain().lower()[k], rho.domain().upper()[k]);
      const double v = rho(x);
      ASSERT_GE(v, b.lower * (1.0 - 1e-12));
      ASSERT_LE(v, b.upper * (1.0 + 1e-12));
    }
  });
}

TEST(Sample, UniformMeanObeysTheLawOfLargeNumbers) {
  const std::size_t n = 100000;
  const Dataset data = sample(Density::uniform(Domain::unit(1)), n, 42);
  const double mean = data.points.col(0).mean();
  EXPECT_LE(std::abs(mean - 0.5), 3.0 * (1.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n)));
}

TEST(Sample, TileMassFraction) {
  const Dataset data = sample(two_tiles(), 100000, 7);
  const double right = (data.points.col(0).array() >= 0.5).cast<double>().mean();
  EXPECT_NEAR(right, 2.0 / 3.0, 0.01);
}

TEST(Sample, SameSeedIsBitIdenticalAndRowsStayInside) {
  const Density rho = Density::gaussian_mixture(Domain::unit(2), {{{0.2, 0.4}, {0.3, 0.3}, 1.0}});
  const Dataset a = sample(rho, 5000, 99), b = sample(rho, 5000, 99), c = sample(rho, 5000, 100);
  EXPECT_EQ(0, std::memcmp(a.points.data(), b.points.data(), sizeof(double) * 10000));
  EXPECT_NE(0, std::memcmp(a.points.data(), c.points.data(), sizeof(double) * 10000));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(rho.domain().contains(a.point(i)));
  EXPECT_EQ(a.seed, 99u);
}

// Pearson statistic over ten equal slabs of axis 0; cell masses by Simpson.
double chi_square(const Density& rho, const Dataset& data) {
  const double lo = rho.domain().lower()[0], len = rho.domain().extent(0);
  const std::size_t d = rho.dim();
  std::vector<double> counts(10, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto c = static_cast<std::size_t>((data.points(static_cast<Eigen::Index>(i), 0) - lo) / len * 10.0);
    counts[std::min<std::size_t>(c, 9)] += 1.0;
  }
  double stat = 0.0;
  for (std::size_t c = 0; c < 10; ++c) {
    const double a = lo + len * static_cast<double>(c) / 10.0, b = a + len / 10.0;
    double p;
    if (d == 1) {
      p = oracle::simpson([&](double x) { return eval1(rho, x); }, a, b, 200);
    } else {
      p = oracle::simpson2(
          [&](double x, double y) {
            const double pt[2] = {x, y};
            return rho(pt);
          },
          a, b, rho.domain().lower()[1], rho.domain().upper()[1], 100);
    }
    const double expected = p * static_cast<double>(data.size());
    stat += (counts[c] - expected) * (counts[c] - expected) / expected;
  }
  return stat;
}

TEST(Sample, ChiSquareGoodnessOfFitForEveryKind) {
  const double critical = 27.877;  // chi-square, 9 degrees of freedom, upper 1e-3
  const std::vector<Density> kinds = {
      Density::uniform(Domain::unit(1)), two_tiles(), centered_gaussian(),
      Density::gaussian_mixture(Domain({0.0, 0.0}, {2.0, 1.0}),
                                {{{0.5, 0.5}, {0.4, 0.3}, 1.0}, {{1.6, 0.2}, {0.2, 0.5}, 0.5}}),
      Density::tiles(Domain::unit(2), {2, 2}, {1.0, 2.0, 3.0, 4.0})};
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    int passed = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      passed += chi_square(kinds[k], sample(kinds[k], 100000, 1000 + seed)) <= critical;
    EXPECT_GE(passed, 9) << "density " << k;
  }
}

TEST(DensityJson, RoundTripsEveryKind) {
  gen::for_all(10, 5, [](gen::Gen& g) {
    const Density rho = g.density(g.index(1, 2));
    const Density back = Density::from_json(rho.to_json());
    EXPECT_EQ(back.to_json()["kind"], rho.to_json()["kind"]);
    EXPECT_EQ(back.to_json()["domain"], rho.to_json()["domain"]);
    std::vector<double> x(rho.dim());
    for (std::size_t k = 0; k < rho.dim(); ++k)
      x[k] = g.uniform(rho.domain().lower()[k], rho.domain().upper()[k]);
    EXPECT_NEAR(back(x), rho(x), 1e-14 * rho(x));
  });
}

TEST(DensityJson, ParsesTheDocumentedShape) {
  const auto j = nlohmann::json::parse(R"({"domain":{"lower":[0],"upper":[1]},
      "kind":"piecewise-constant-tiles","params":{"shape":[2],"values":[1,3]}})");
  const Density rho = Density::from_json(j);
  EXPECT_DOUBLE_EQ(eval1(rho, 0.9), 1.5);
  EXPECT_THROW(Density::from_json(nlohmann::json::parse(
                   R"({"domain":{"lower":[0],"upper":[1]},"kind":"cauchy"})")),
               std::invalid_argument);
}

}  // namespace
