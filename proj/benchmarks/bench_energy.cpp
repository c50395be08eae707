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
#include "tsnelab/energy.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace tsnelab;

struct Instance {
  Dataset data;
  BandwidthProfile profile;
  Matrix y;
};

Instance make_instance(std::size_t n, std::size_t d) {
  const Density density = Density::uniform(Domain::unit(d));
  Dataset data = sample(density, n, 7);
  const double h = std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 1.0));
  BandwidthProfile profile = analytic_profile(data, density, 1.0, h);
  Rng rng(11);
  Matrix y(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = 10.0 * rng.normal();
  return {std::move(data), std::move(profile), std::move(y)};
}

void BM_EvaluateGradients(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Instance in = make_instance(n, 2);
  const DiscreteEnergy energy(in.data, in.profile, {RepulsionSum::exclusive, n > 2048});
  for (auto _ : state) benchmark::DoNotOptimize(energy.evaluate(in.y, false, true));
  state.counters["pairs/s"] = benchmark::Counter(
      static_cast<double>(n) * static_cast<double>(n - 1) / 2.0, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_EvaluateGradients)->Arg(512)->Arg(2048)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_EvaluateFull(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Instance in = make_instance(n, 2);
  const DiscreteEnergy energy(in.data, in.profile);
  for (auto _ : state) benchmark::DoNotOptimize(energy.evaluate(in.y, true, true));
}
BENCHMARK(BM_EvaluateFull)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_ConditionalAffinities(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Instance in = make_instance(n, 1);
  for (auto _ : state) {
    ConditionalAffinities cond(in.data, in.profile, true);
    benchmark::DoNotOptimize(cond.size());
  }
}
BENCHMARK(BM_ConditionalAffinities)->Arg(4096)->Arg(32768)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Instance in = make_instance(n, 2);
  const Embedding emb{in.y};
  for (auto _ : state) benchmark::DoNotOptimize(decompose(in.data, in.profile, emb));
}
BENCHMARK(BM_Decompose)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
