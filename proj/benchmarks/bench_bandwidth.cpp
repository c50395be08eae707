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


#include "tsnelab/bandwidth.hpp"
#include "tsnelab/density.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace tsnelab;

void BM_Perplexity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset data = sample(Density::uniform(Domain::unit(1)), n, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(perplexity(data, i, 0.01));
    i = (i + 1) % n;
  }
}
BENCHMARK(BM_Perplexity)->Arg(1024)->Arg(16384);

void BM_CalibrateProfile(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset data = sample(Density::uniform(Domain::unit(1)), n, 5);
  const double h = std::pow(static_cast<double>(n), -0.5);
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_profile(data, 1.0, h, 1e-4));
}
BENCHMARK(BM_CalibrateProfile)->Arg(1024)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_Kde(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Dataset data = sample(Density::uniform(Domain::unit(2)), n, 9);
  const double x[2] = {0.5, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(kde(data, 0.05, x));
}
BENCHMARK(BM_Kde)->Arg(100000);

}  // namespace
