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

#ifndef TSNELAB_OPTIMIZE_HPP
#define TSNELAB_OPTIMIZE_HPP

#include "tsnelab/bandwidth.hpp"
#include "tsnelab/continuum.hpp"
#include "tsnelab/energy.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tsnelab {

enum class InitKind { gaussian, pca, given };

struct InitSpec {
  InitKind kind = InitKind::gaussian;
  double scale = 1e-2;
  std::uint64_t seed = 0;
  std::optional<Matrix> given;
};

/// Momentum descent settings.
///
/// For point configurations the applied step is learning_rate * n / w *
/// gradient, where w is the attraction weight of the variant (1 classic,
/// 1/h^2 rescaled). The factor n keeps per-point moves independent of n,
/// since gradients of the mean-type energies scale like 1/n; dividing by w
/// keeps the stable range of learning_rate independent of h. For grid maps
/// the step is learning_rate / GridEnergy::stiffness(), so learning_rate < 2
/// is stable without momentum.
struct OptimizerConfig {
  std::size_t steps = 1000;
  double learning_rate = 0.25;
  double momentum = 0.5;
  double exaggeration_factor = 1.0;
  std::size_t exaggeration_steps = 0;
  InitSpec init;
  double convergence_tol = 1e-9;
  std::size_t embedding_dim = 2;
  std::size_t record_every = 10;
  /// Consecutive objective increases tolerated before declaring divergence.
  std::size_t divergence_window = 50;
  /// Energies are evaluated every energy_every steps (and on recorded steps).
  /// Divergence is judged on the evaluated steps only.
  std::size_t energy_every = 1;
  RepulsionSum repulsion = RepulsionSum::exclusive;
  bool use_neighbor_grid = false;

  void validate() const;
  static OptimizerConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct TraceRecord {
  std::size_t step = 0;
  double attract = 0.0;
  double repulse = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;
  double diameter = 0.0;
  double rms_spread = 0.0;
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  std::size_t steps_taken = 0;
  bool converged = false;
};

struct DiscreteResult {
  Embedding embedding;
  OptimizationTrace trace;
};

struct GridResult {
  GridMap map;
  OptimizationTrace trace;
};

/// Starting configuration for n points of `data` per config.init.
Matrix initial_embedding(const Dataset& data, const OptimizerConfig& config);

/// Largest distance between two rows.
double diameter(const Matrix& y);
/// sqrt of the mean squared distance of the rows from their centroid.
double rms_spread(const Matrix& y);

/// Momentum descent on A + R (classic) or A / h^2 + R (rescaled). During the
/// first exaggeration_steps the attraction gradient is multiplied by the
/// exaggeration factor. total in the trace is the unexaggerated objective.
DiscreteResult minimize_discrete(const Dataset& data, const BandwidthProfile& profile,
                                 Variant variant, const OptimizerConfig& config);

/// Same, over precomputed pair weights and a starting configuration.
DiscreteResult minimize_discrete(const DiscreteEnergy& energy, Matrix init, Variant variant,
                                 const OptimizerConfig& config);

/// Starting node values for minimize_gridmap.
Matrix initial_gridmap(const QuadratureGrid& grid, const OptimizerConfig& config);

/// Momentum descent on the discretized limiting energy. The result is
/// centered to zero rho-weighted mean. init.given, when set, supplies the
/// starting node values; pca starts from a scaled linear ramp along the
/// longest domain axis.
GridResult minimize_gridmap(const Density& density, double kappa, const QuadratureGrid& grid,
                            const OptimizerConfig& config);

enum class GradTarget { discrete_classic, discrete_rescaled, gridmap };

std::string to_string(GradTarget t);
GradTarget grad_target_from_string(const std::string& s);

struct GradcheckReport {
  GradTarget target;
  std::uint64_t seed;
  double step;
  double max_rel_error;
  std::size_t entries;
  bool pass;
};

/// Compares analytic and central-difference gradients on a small seeded
/// instance: 16 points in d = 2 embedded in m = 2 for the discrete targets,
/// 16 nodes on [0, 1] with two outputs for the grid target. The relative
/// error of an entry is |a - f| / max(|a|, |f|, floor) with the floor set
/// to 1e-3 times the largest analytic entry.
GradcheckReport gradcheck(GradTarget target, std::uint64_t seed, double step);

}  // namespace tsnelab

#endif  // TSNELAB_OPTIMIZE_HPP
