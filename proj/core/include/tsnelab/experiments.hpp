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

#ifndef TSNELAB_EXPERIMENTS_HPP
#define TSNELAB_EXPERIMENTS_HPP

#include "tsnelab/bandwidth.hpp"
#include "tsnelab/continuum.hpp"
#include "tsnelab/density.hpp"
#include "tsnelab/optimize.hpp"
#include "tsnelab/smooth_map.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tsnelab {

/// Seeded sweep over sample sizes. JSON keys match the field names.
struct SweepConfig {
  std::string name;  // output file stem; defaults to the experiment name
  Density density = Density::uniform(Domain::unit(1));
  double kappa = 1.0;
  double xi = 1.0;  // h_n = n^(-1/(d + xi))
  std::vector<std::size_t> n_values;
  std::vector<std::uint64_t> seeds;
  std::optional<SmoothMap> map;
  std::optional<OptimizerConfig> optimizer;
  std::optional<double> interior_margin;  // default 0.1 * diam(Omega)

  std::optional<ProfileMode> profile;  // per-experiment default when absent
  double calibration_tol = 1e-5;
  std::optional<double> pinned_h;  // fixes h for every n (control runs)
  std::vector<std::size_t> grid_sizes;  // nodes per axis for grid-map runs
  std::size_t quadrature_nodes = 0;     // per axis; 0 selects the standard grid
  std::optional<OptimizerConfig> continuum_optimizer;
  ResidualForm residual_form = ResidualForm::variational;
  std::optional<bool> use_neighbor_grid;  // default: on for n > 2048
  std::size_t threads = 1;

  static SweepConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;

  double h_for(std::size_t n) const;
  double margin() const;
};

struct SweepRow {
  std::size_t n;
  std::uint64_t seed;
  std::string metric;
  double value;
};

struct Aggregate {
  std::size_t n;
  std::string metric;
  double median;
  double q1;
  double q3;
  double iqr;
  std::size_t count;  // finite values only
};

struct SweepResult {
  std::string experiment;
  std::string name;
  std::vector<std::string> metrics;  // in row order
  std::vector<SweepRow> rows;        // sorted by (n, seed, metric order)
  std::vector<Aggregate> aggregates;
  nlohmann::json extras = nlohmann::json::object();
  /// Metrics drawn in the SVG (median against n).
  std::vector<std::string> plotted;
  std::string x_label = "n";

  /// Medians of a metric in increasing n.
  std::vector<double> medians(const std::string& metric) const;
  std::vector<std::size_t> n_values() const;
};

/// Median and quartiles with linear interpolation between order statistics.
/// Non-finite values are ignored.
Aggregate summarize(std::vector<double> values);

SweepResult exp_bandwidth(const SweepConfig& config);
SweepResult exp_consistency(const SweepConfig& config);
SweepResult exp_illposed(const SweepConfig& config);
SweepResult exp_rescaled(const SweepConfig& config);
SweepResult exp_el_residual(const SweepConfig& config);

/// Dispatches on bandwidth | consistency | illposed | rescaled | el.
SweepResult run_experiment(const std::string& experiment, const SweepConfig& config);

/// CSV with columns n,seed,metric,value.
std::string to_csv(const SweepResult& result);
std::string to_svg(const SweepResult& result);
nlohmann::json to_meta(const SweepResult& result, const SweepConfig& config);

/// Writes <name>.csv, <name>.svg and <name>.meta.json into dir.
void write_outputs(const SweepResult& result, const SweepConfig& config,
                   const std::filesystem::path& dir);

std::string version();

}  // namespace tsnelab

#endif  // TSNELAB_EXPERIMENTS_HPP
