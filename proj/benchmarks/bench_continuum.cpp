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


#include "tsnelab/continuum.hpp"
#include "tsnelab/density.hpp"
#include "tsnelab/quadrature.hpp"
#include "tsnelab/smooth_map.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

namespace {

using namespace tsnelab;

SmoothMap sine_map() {
  Matrix f(1, 1);
  f(0, 0) = std::numbers::pi;
  return SmoothMap::sinusoid(Vector::Ones(1), f, Vector::Zero(1));
}

void BM_AveragedAttraction(benchmark::State& state) {
  const Density density = Density::uniform(Domain::unit(1));
  const QuadratureGrid grid(density.domain(), {static_cast<std::size_t>(state.range(0))});
  const SmoothMap map = sine_map();
  for (auto _ : state)
    benchmark::DoNotOptimize(averaged_attraction(density, map, 1.0, 0.05, grid));
}
BENCHMARK(BM_AveragedAttraction)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_GridEnergy(benchmark::State& state) {
  const Density density = Density::uniform(Domain::unit(2));
  const auto nodes = static_cast<std::size_t>(state.range(0));
  const QuadratureGrid grid(density.domain(), {nodes});
  const GridEnergy energy(density, grid, 1.0);
  const GridMap map = GridMap::sample(SmoothMap::identity(2), grid);
  for (auto _ : state) benchmark::DoNotOptimize(energy.evaluate(map.values, true));
}
BENCHMARK(BM_GridEnergy)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
