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


#include "tsnelab/experiments.hpp"

#include "tsnelab/energy.hpp"
#include "tsnelab/io.hpp"
#include "tsnelab/svg_plot.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef TSNELAB_VERSION
#define TSNELAB_VERSION "unknown"
#endif

namespace tsnelab {

std::string version() { return TSNELAB_VERSION; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using CellMetrics = std::map<std::string, double>;

}  // namespace

// ---------------------------------------------------------------------------

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
  SweepConfig c;
  c.name = j.value("name", std::string());
  if (j.contains("density")) c.density = Density::from_json(j["density"]);
  c.kappa = j.value("kappa", c.kappa);
  c.xi = j.value("xi", c.xi);
  c.n_values = j.value("n_values", c.n_values);
  c.seeds = j.value("seeds", c.seeds);
  if (j.contains("map")) c.map = SmoothMap::from_json(j["map"]);
  if (j.contains("optimizer")) c.optimizer = OptimizerConfig::from_json(j["optimizer"]);
  if (j.contains("interior_margin")) c.interior_margin = j["interior_margin"].get<double>();
  if (j.contains("profile")) c.profile = profile_mode_from_string(j["profile"].get<std::string>());
  c.calibration_tol = j.value("calibration_tol", c.calibration_tol);
  if (j.contains("pinned_h")) c.pinned_h = j["pinned_h"].get<double>();
  c.grid_sizes = j.value("grid_sizes", c.grid_sizes);
  c.quadrature_nodes = j.value("quadrature_nodes", c.quadrature_nodes);
  if (j.contains("continuum_optimizer"))
    c.continuum_optimizer = OptimizerConfig::from_json(j["continuum_optimizer"]);
  if (j.contains("residual_form"))
    c.residual_form = residual_form_from_string(j["residual_form"].get<std::string>());
  if (j.contains("use_neighbor_grid")) c.use_neighbor_grid = j["use_neighbor_grid"].get<bool>();
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

nlohmann::json SweepConfig::to_json() const {
  nlohmann::json j;
  if (!name.empty()) j["name"] = name;
  j["density"] = density.to_json();
  j["kappa"] = kappa;
  j["xi"] = xi;
  j["n_values"] = n_values;
  j["seeds"] = seeds;
  if (map) j["map"] = map->to_json();
  if (optimizer) j["optimizer"] = optimizer->to_json();
  if (interior_margin) j["interior_margin"] = *interior_margin;
  if (profile) j["profile"] = to_string(*profile);
  j["calibration_tol"] = calibration_tol;
  if (pinned_h) j["pinned_h"] = *pinned_h;
  if (!grid_sizes.empty()) j["grid_sizes"] = grid_sizes;
  if (quadrature_nodes) j["quadrature_nodes"] = quadrature_nodes;
  if (continuum_optimizer) j["continuum_optimizer"] = continuum_optimizer->to_json();
  j["residual_form"] = to_string(residual_form);
  if (use_neighbor_grid) j["use_neighbor_grid"] = *use_neighbor_grid;
  j["threads"] = threads;
  return j;
}

void SweepConfig::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("sweep: kappa must be positive");
  if (!(xi > 0.0)) throw std::invalid_argument("sweep: xi must be positive");
  if (seeds.empty()) throw std::invalid_argument("sweep: seeds must be nonempty");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] == 0) throw std::invalid_argument("sweep: n_values must be positive");
    if (i && n_values[i] <= n_values[i - 1])
      throw std::invalid_argument("sweep: n_values must be strictly increasing");
  }
  for (std::size_t i = 1; i < grid_sizes.size(); ++i)
    if (grid_sizes[i] <= grid_sizes[i - 1])
      throw std::invalid_argument("sweep: grid_sizes must be strictly increasing");
  if (interior_margin && !(*interior_margin >= 0.0))
    throw std::invalid_argument("sweep: interior_margin must be nonnegative");
  if (pinned_h && !(*pinned_h > 0.0)) throw std::invalid_argument("sweep: pinned_h must be positive");
  if (!(calibration_tol > 0.0)) throw std::invalid_argument("sweep: calibration_tol must be positive");
  if (threads == 0) throw std::invalid_argument("sweep: threads must be positive");
}

double SweepConfig::h_for(std::size_t n) const {
  if (pinned_h) return *pinned_h;
  return std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(density.dim()) + xi));
}

double SweepConfig::margin() const {
  return interior_margin ? *interior_margin : 0.1 * density.domain().diameter();
}

// ---------------------------------------------------------------------------

Aggregate summarize(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  Aggregate a{0, "", kNaN, kNaN, kNaN, kNaN, values.size()};
  if (values.empty()) return a;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  a.median = quantile(0.5);
  a.q1 = quantile(0.25);
  a.q3 = quantile(0.75);
  a.iqr = a.q3 - a.q1;
  return a;
}

std::vector<std::size_t> SweepResult::n_values() const {
  std::vector<std::size_t> ns;
  for (const auto& r : rows)
    if (ns.empty() || ns.back() != r.n) ns.push_back(r.n);
  return ns;
}

std::vector<double> SweepResult::medians(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& a : aggregates)
    if (a.metric == metric) out.push_back(a.median);
  return out;
}

namespace {

// Runs f(n, seed) over all cells, possibly concurrently, and assembles rows
// in (n, seed, metric) order.
template <class F>
void run_cells(const SweepConfig& config, const std::vector<std::size_t>& ns,
               SweepResult& result, F&& f) {
  struct Cell {
    std::size_t n;
    std::uint64_t seed;
    CellMetrics metrics;
    std::exception_ptr error;
  };
  std::vector<Cell> cells;
  for (auto n : ns)
    for (auto s : config.seeds) cells.push_back({n, s, {}, nullptr});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < cells.size();) {
      try {
        cells[c].metrics = f(cells[c].n, cells[c].seed);
      } catch (...) {
        cells[c].error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(config.threads, cells.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& cell : cells) {
    if (cell.error) std::rethrow_exception(cell.error);
    for (const auto& m : result.metrics) {
      const auto it = cell.metrics.find(m);
      result.rows.push_back({cell.n, cell.seed, m, it == cell.metrics.end() ? kNaN : it->second});
    }
  }
  for (auto n : ns)
    for (const auto& m : result.metrics) {
      std::vector<double> v;
      for (const auto& r : result.rows)
        if (r.n == n && r.metric == m) v.push_back(r.value);
      Aggregate a = summarize(std::move(v));
      a.n = n;
      a.metric = m;
      result.aggregates.push_back(a);
    }
}

Dataset cell_dataset(const SweepConfig& config, std::size_t n, std::uint64_t seed) {
  return sample(config.density, n, derive_seed(seed, n));
}

bool neighbor_grid_for(const SweepConfig& config, std::size_t n) {
  return config.use_neighbor_grid ? *config.use_neighbor_grid : n > 2048;
}

BandwidthProfile cell_profile(const SweepConfig& config, const Dataset& data, double h,
                              ProfileMode fallback) {
  const auto mode = config.profile.value_or(fallback);
  if (mode == ProfileMode::analytic) return analytic_profile(data, config.density, config.kappa, h);
  return calibrate_profile(data, config.kappa, h, config.calibration_tol);
}

QuadratureGrid quadrature_for(const SweepConfig& config) {
  if (config.quadrature_nodes)
    return QuadratureGrid(config.density.domain(), {config.quadrature_nodes});
  return QuadratureGrid::standard(config.density.domain());
}

OptimizerConfig cell_optimizer(const OptimizerConfig& base, std::size_t n, std::uint64_t seed) {
  OptimizerConfig c = base;
  c.init.seed = derive_seed(seed ^ base.init.seed, n + 0x5eed);
  return c;
}

const OptimizerConfig& require_optimizer(const SweepConfig& config, const char* experiment) {
  if (!config.optimizer)
    throw std::invalid_argument(std::string(experiment) + ": config needs an optimizer section");
  return *config.optimizer;
}

SmoothMap reference_map(const SweepConfig& config, std::size_t m) {
  if (config.map) return *config.map;
  const std::size_t d = config.density.dim();
  Matrix freq = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  for (std::size_t l = 0; l < m; ++l)
    freq(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l % d)) = std::numbers::pi;
  return SmoothMap::sinusoid(Vector::Ones(static_cast<Eigen::Index>(m)), freq,
                             Vector::Zero(static_cast<Eigen::Index>(m)));
}

std::string name_or(const SweepConfig& config, const std::string& fallback) {
  return config.name.empty() ? fallback : config.name;
}

void require_n_values(const SweepConfig& config, const char* experiment) {
  if (config.n_values.empty())
    throw std::invalid_argument(std::string(experiment) + ": n_values must be nonempty");
}

}  // namespace

// ---------------------------------------------------------------------------

SweepResult exp_bandwidth(const SweepConfig& config) {
  config.validate();
  require_n_values(config, "exp_bandwidth");
  SweepResult result;
  result.experiment = "bandwidth";
  result.name = name_or(config, "bandwidth");
  result.metrics = {"sup_error", "median_error", "interior_points"};
  const bool tiles = config.density.kind() == DensityKind::tiles;
  const std::size_t tile_count = tiles ? config.density.tile_values().size() : 0;
  for (std::size_t t = 0; t < tile_count; ++t)
    result.metrics.push_back("tile" + std::to_string(t) + "_median_sigma_hat");
  result.plotted = {"sup_error", "median_error"};
  const double margin = config.margin();

  run_cells(config, config.n_values, result, [&](std::size_t n, std::uint64_t seed) {
    const Dataset data = cell_dataset(config, n, seed);
    const double h = config.h_for(n);
    const auto profile = calibrate_profile(data, config.kappa, h, config.calibration_tol);
    std::vector<double> errors;
    std::vector<std::vector<double>> per_tile(tile_count);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = data.point(i);
      if (config.density.domain().distance_to_boundary(x) <= margin) continue;
      const double hat = profile.normalized(i);
      errors.push_back(std::abs(hat - limit_bandwidth(config.density, config.kappa, x)));
      if (tiles) per_tile[config.density.tile_index(x)].push_back(hat);
    }
    CellMetrics m;
    m["interior_points"] = static_cast<double>(errors.size());
    m["sup_error"] = errors.empty() ? kNaN : *std::max_element(errors.begin(), errors.end());
    m["median_error"] = summarize(errors).median;
    for (std::size_t t = 0; t < tile_count; ++t)
      m["tile" + std::to_string(t) + "_median_sigma_hat"] = summarize(per_tile[t]).median;
    return m;
  });
  result.extras["sigma_kappa_uniform"] =
      config.density.kind() == DensityKind::uniform
          ? nlohmann::json(std::pow(config.kappa / config.density.bounds().upper,
                                    1.0 / static_cast<double>(config.density.dim())) /
                           std::sqrt(kTwoPiE))
          : nlohmann::json(nullptr);
  return result;
}

SweepResult exp_consistency(const SweepConfig& config) {
  config.validate();
  require_n_values(config, "exp_consistency");
  if (!config.map) throw std::invalid_argument("exp_consistency: config needs a map");
  const SmoothMap& map = *config.map;
  if (map.input_dim() != config.density.dim())
    throw std::invalid_argument("exp_consistency: map input dimension differs from density");
  SweepResult result;
  result.experiment = "consistency";
  result.name = name_or(config, "consistency");
  result.metrics = {"attraction_rescaled", "attraction_error", "attraction_rel_error",
                    "repulsion", "repulsion_error", "repulsion_rel_error"};
  result.plotted = {"attraction_error", "repulsion_error"};

  const auto grid = quadrature_for(config);
  const double target = dirichlet_target(config.density, map, config.kappa, grid);
  const double r_tilde = averaged_repulsion(config.density, map, grid);
  result.extras["dirichlet_target"] = target;
  result.extras["averaged_repulsion"] = r_tilde;
  result.extras["profile"] = to_string(config.profile.value_or(ProfileMode::analytic));

  run_cells(config, config.n_values, result, [&](std::size_t n, std::uint64_t seed) {
    const Dataset data = cell_dataset(config, n, seed);
    const double h = config.h_for(n);
    const auto profile = cell_profile(config, data, h, ProfileMode::analytic);
    const Embedding emb = apply_map(map, data);
    const ConditionalAffinities cond(data, profile, neighbor_grid_for(config, n));
    const double a = attraction_energy(cond, emb.y) / (h * h);
    const double r = repulsion_energy(emb.y);
    CellMetrics m;
    m["attraction_rescaled"] = a;
    m["attraction_error"] = std::abs(a - target);
    m["attraction_rel_error"] = target != 0.0 ? std::abs(a - target) / std::abs(target) : kNaN;
    m["repulsion"] = r;
    m["repulsion_error"] = std::abs(r - r_tilde);
    m["repulsion_rel_error"] = r_tilde != 0.0 ? std::abs(r - r_tilde) / std::abs(r_tilde) : kNaN;
    return m;
  });
  return result;
}

namespace {

CellMetrics discrete_run(const SweepConfig& config, std::size_t n, std::uint64_t seed, Variant variant,
                         ProfileMode fallback) {
  const auto& base = require_optimizer(config, variant == Variant::classic ? "exp_illposed" : "exp_rescaled");
  const Dataset data = cell_dataset(config, n, seed);
  const double h = config.h_for(n);
  const auto profile = cell_profile(config, data, h, fallback);
  auto opt = cell_optimizer(base, n, seed);
  opt.use_neighbor_grid = neighbor_grid_for(config, n);
  CellMetrics m;
  try {
    const auto res = minimize_discrete(data, profile, variant, opt);
    const auto& last = res.trace.records.back();
    m["rms_spread"] = last.rms_spread;
    m["diameter"] = last.diameter;
    m["final_energy"] = last.total;
    m["grad_norm"] = last.grad_norm;
    m["steps"] = static_cast<double>(res.trace.steps_taken);
    m["diverged"] = 0.0;
  } catch (const DivergenceError& e) {
    m["steps"] = static_cast<double>(e.step);
    m["diverged"] = 1.0;
  }
  return m;
}

}  // namespace

SweepResult exp_illposed(const SweepConfig& config) {
  config.validate();
  require_n_values(config, "exp_illposed");
  const auto& base = require_optimizer(config, "exp_illposed");
  SweepResult result;
  result.experiment = "illposed";
  result.name = name_or(config, "illposed");
  result.metrics = {"rms_spread", "diameter", "final_energy", "grad_norm",
                    "steps",      "diverged", "reference_attraction"};
  result.plotted = {"rms_spread", "diameter", "reference_attraction"};

  const SmoothMap ref = reference_map(config, base.embedding_dim);
  const auto grid = quadrature_for(config);
  std::map<std::size_t, double> reference;
  for (auto n : config.n_values)
    reference[n] = averaged_attraction(config.density, ref, config.kappa, config.h_for(n), grid).value;
  result.extras["reference_map"] = ref.to_json();
  result.extras["profile"] = to_string(config.profile.value_or(ProfileMode::calibrated));
  if (config.pinned_h) result.extras["pinned_h"] = *config.pinned_h;

  run_cells(config, config.n_values, result, [&](std::size_t n, std::uint64_t seed) {
    CellMetrics m = discrete_run(config, n, seed, Variant::classic, ProfileMode::calibrated);
    m["reference_attraction"] = reference.at(n);
    return m;
  });
  return result;
}

SweepResult exp_rescaled(const SweepConfig& config) {
  config.validate();
  require_n_values(config, "exp_rescaled");
  const auto& base = require_optimizer(config, "exp_rescaled");
  SweepResult result;
  result.experiment = "rescaled";
  result.name = name_or(config, "rescaled");
  result.metrics = {"rms_spread", "diameter", "final_energy", "grad_norm", "steps", "diverged"};
  result.plotted = {"rms_spread", "diameter"};
  result.extras["profile"] = to_string(config.profile.value_or(ProfileMode::analytic));

  run_cells(config, config.n_values, result, [&](std::size_t n, std::uint64_t seed) {
    return discrete_run(config, n, seed, Variant::rescaled, ProfileMode::analytic);
  });

  OptimizerConfig cont = config.continuum_optimizer.value_or(base);
  cont.embedding_dim = base.embedding_dim;
  const QuadratureGrid grid =
      config.grid_sizes.empty() ? quadrature_for(config)
                                : QuadratureGrid(config.density.domain(),
                                                 std::vector<std::size_t>(config.density.dim(), config.grid_sizes.back()));
  nlohmann::json c;
  try {
    const auto res = minimize_gridmap(config.density, config.kappa, grid, cont);
    const auto rho = node_density(config.density, grid);
    c["rms_spread"] = weighted_rms_spread(res.map, rho);
    c["steps"] = res.trace.steps_taken;
    c["converged"] = res.trace.converged;
    c["grad_norm"] = res.trace.records.back().grad_norm;
    c["energy"] = res.trace.records.back().total;
    c["diverged"] = false;
  } catch (const DivergenceError& e) {
    c["rms_spread"] = nullptr;
    c["steps"] = e.step;
    c["diverged"] = true;
  }
  c["nodes_per_axis"] = grid.counts();
  result.extras["continuum"] = c;
  const auto med = result.medians("rms_spread");
  const double largest = med.empty() ? kNaN : med.back();
  result.extras["largest_n"] = config.n_values.back();
  result.extras["largest_n_median_rms_spread"] = largest;
  if (c["rms_spread"].is_number() && std::isfinite(largest) && largest != 0.0)
    result.extras["continuum_relative_gap"] = std::abs(c["rms_spread"].get<double>() - largest) / largest;
  return result;
}

SweepResult exp_el_residual(const SweepConfig& config) {
  config.validate();
  const OptimizerConfig base = config.optimizer ? *config.optimizer
                                                : config.continuum_optimizer.value_or(OptimizerConfig{});
  const std::size_t d = config.density.dim();
  std::vector<std::size_t> sizes = config.grid_sizes;
  if (sizes.empty()) sizes = d == 1 ? std::vector<std::size_t>{64, 128} : std::vector<std::size_t>{32, 64};
  SweepResult result;
  result.experiment = "el";
  result.name = name_or(config, "el");
  result.x_label = "nodes per axis";
  result.metrics = {"residual_init", "residual_final", "residual_ratio", "boundary_flux", "steps",
                    "converged"};
  result.plotted = {"residual_init", "residual_final", "residual_ratio"};
  result.extras["residual_form"] = to_string(config.residual_form);

  run_cells(config, sizes, result, [&](std::size_t nodes, std::uint64_t seed) {
    const QuadratureGrid grid(config.density.domain(), std::vector<std::size_t>(d, nodes));
    const auto opt = cell_optimizer(base, nodes, seed);
    const GridMap init(grid, initial_gridmap(grid, opt));
    const double r0 = el_residual(init, config.density, config.kappa, config.residual_form).cwiseAbs().maxCoeff();
    CellMetrics m;
    m["residual_init"] = r0;
    try {
      const auto res = minimize_gridmap(config.density, config.kappa, grid, opt);
      const double r1 =
          el_residual(res.map, config.density, config.kappa, config.residual_form).cwiseAbs().maxCoeff();
      m["residual_final"] = r1;
      m["residual_ratio"] = r0 > 0.0 ? r1 / r0 : kNaN;
      m["boundary_flux"] = boundary_flux(res.map);
      m["steps"] = static_cast<double>(res.trace.steps_taken);
      m["converged"] = res.trace.converged ? 1.0 : 0.0;
    } catch (const DivergenceError& e) {
      m["steps"] = static_cast<double>(e.step);
      m["converged"] = 0.0;
    }
    return m;
  });
  return result;
}

SweepResult run_experiment(const std::string& experiment, const SweepConfig& config) {
  if (experiment == "bandwidth") return exp_bandwidth(config);
  if (experiment == "consistency") return exp_consistency(config);
  if (experiment == "illposed") return exp_illposed(config);
  if (experiment == "rescaled") return exp_rescaled(config);
  if (experiment == "el") return exp_el_residual(config);
  throw std::invalid_argument("unknown experiment '" + experiment +
                              "'; expected bandwidth, consistency, illposed, rescaled or el");
}

// ---------------------------------------------------------------------------

std::string to_csv(const SweepResult& result) {
  std::ostringstream o;
  o << "n,seed,metric,value\n";
  for (const auto& r : result.rows)
    o << r.n << ',' << r.seed << ',' << r.metric << ',' << format_double(r.value) << '\n';
  return o.str();
}

std::string to_svg(const SweepResult& result) {
  PlotSpec spec;
  spec.title = result.name + ": median over seeds";
  spec.x_label = result.x_label;
  spec.y_label = "value";
  for (const auto& metric : result.plotted) {
    PlotSeries s;
    s.label = metric;
    for (const auto& a : result.aggregates)
      if (a.metric == metric) {
        s.x.push_back(static_cast<double>(a.n));
        s.y.push_back(a.median);
      }
    spec.series.push_back(std::move(s));
  }
  return render_svg(spec);
}

nlohmann::json to_meta(const SweepResult& result, const SweepConfig& config) {
  nlohmann::json j;
  j["experiment"] = result.experiment;
  j["name"] = result.name;
  j["version"] = version();
  j["config"] = config.to_json();
  j["seeds"] = config.seeds;
  j["metrics"] = result.metrics;
  auto aggs = nlohmann::json::array();
  for (const auto& a : result.aggregates) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    aggs.push_back({{"n", a.n}, {"metric", a.metric}, {"median", num(a.median)}, {"q1", num(a.q1)},
                    {"q3", num(a.q3)}, {"iqr", num(a.iqr)}, {"count", a.count}});
  }
  j["aggregates"] = aggs;
  j["extras"] = result.extras;
  return j;
}

void write_outputs(const SweepResult& result, const SweepConfig& config,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& ext, const std::string& text) {
    std::ofstream out(dir / (result.name + ext), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / (result.name + ext)).string());
    out << text;
  };
  write(".csv", to_csv(result));
  write(".svg", to_svg(result));
  write(".meta.json", to_meta(result, config).dump(2) + "\n");
}

}  // namespace tsnelab
