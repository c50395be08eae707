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


// tsne-lab: command line front end for sampling, calibration, energies,
// descent and the experiment sweeps.

#include "tsnelab/bandwidth.hpp"
#include "tsnelab/continuum.hpp"
#include "tsnelab/density.hpp"
#include "tsnelab/energy.hpp"
#include "tsnelab/experiments.hpp"
#include "tsnelab/io.hpp"
#include "tsnelab/optimize.hpp"
#include "tsnelab/smooth_map.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tsnelab;

namespace {

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << j.dump(2) << '\n';
  else
    write_json(out, j);
}

json breakdown_json(const EnergyBreakdown& e) {
  json j = {{"attract", e.attract},
            {"repulse", e.repulse},
            {"data_shifted", e.data_shifted},
            {"total_kl", e.total_kl}};
  j["rescaled_total"] = e.rescaled_total ? json(*e.rescaled_total) : json(nullptr);
  return j;
}

struct SampleArgs {
  std::string density, out = "-";
  std::size_t n = 1000;
  std::uint64_t seed = 0;
};

struct CalibrateArgs {
  std::string data, out;
  double kappa = 1.0, h = 0.0, tol = 1e-5;
};

struct EnergyArgs {
  std::string data, profile, embedding, variant = "classic", out = "-";
  bool inclusive = false;
};

struct EmbedArgs {
  std::string data, profile, variant = "classic", config, out_embedding, out_trace;
};

struct ContinuumArgs {
  std::string density, map, out = "-", form = "variational";
  double kappa = 1.0;
  std::vector<std::size_t> grid;
};

struct ExpArgs {
  std::string experiment, config, out_dir = ".";
};

struct GradArgs {
  std::string target = "discrete-classic";
  std::uint64_t seed = 0;
  double step = 1e-5;
};

int run_sample(const SampleArgs& a) {
  const Density density = Density::from_json(read_json(a.density));
  const Dataset data = sample(density, a.n, a.seed);
  if (a.out == "-")
    write_dataset_csv(std::cout, data);
  else
    write_dataset_csv(fs::path(a.out), data);
  return 0;
}

int run_calibrate(const CalibrateArgs& a) {
  const Dataset data = read_dataset_csv(a.data);
  double h = a.h;
  if (h <= 0.0)
    h = std::pow(static_cast<double>(data.size()), -1.0 / (static_cast<double>(data.dim()) + 1.0));
  write_profile_csv(a.out, calibrate_profile(data, a.kappa, h, a.tol));
  return 0;
}

int run_energy(const EnergyArgs& a) {
  const Dataset data = read_dataset_csv(a.data);
  const BandwidthProfile profile = read_profile_csv(a.profile);
  const Embedding emb = read_embedding_csv(a.embedding);
  EnergyOptions opts;
  if (a.inclusive) opts.repulsion = RepulsionSum::inclusive;
  EnergyBreakdown e = decompose(data, profile, emb, opts);
  if (variant_from_string(a.variant) == Variant::rescaled)
    e.rescaled_total = e.attract / (profile.h * profile.h) + e.repulse;
  emit(breakdown_json(e), a.out);
  return 0;
}

int run_embed(const EmbedArgs& a) {
  const Dataset data = read_dataset_csv(a.data);
  const BandwidthProfile profile = read_profile_csv(a.profile);
  const OptimizerConfig config =
      a.config.empty() ? OptimizerConfig{} : OptimizerConfig::from_json(read_json(a.config));
  const DiscreteResult r = minimize_discrete(data, profile, variant_from_string(a.variant), config);
  write_embedding_csv(a.out_embedding, r.embedding);
  if (!a.out_trace.empty()) write_trace_csv(fs::path(a.out_trace), r.trace);
  std::cerr << "steps " << r.trace.steps_taken << (r.trace.converged ? " (converged)" : "")
            << '\n';
  return 0;
}

int run_continuum(const ContinuumArgs& a) {
  const Density density = Density::from_json(read_json(a.density));
  json j;
  if (fs::path(a.map).extension() == ".csv") {
    const GridMap gm = read_gridmap_csv(a.map);
    j = breakdown_json(continuum_energy(density, gm, a.kappa));
    const Matrix res = el_residual(gm, density, a.kappa, residual_form_from_string(a.form));
    j["el_residual_max"] = res.cwiseAbs().maxCoeff();
    j["boundary_flux"] = boundary_flux(gm);
  } else {
    const SmoothMap map = SmoothMap::from_json(read_json(a.map));
    const QuadratureGrid grid = a.grid.empty()
                                    ? QuadratureGrid::standard(density.domain())
                                    : QuadratureGrid(density.domain(), a.grid);
    j = breakdown_json(continuum_energy(density, map, a.kappa, grid));
    j["dirichlet_target"] = dirichlet_target(density, map, a.kappa, grid);
  }
  j.erase("data_shifted");
  j.erase("rescaled_total");
  emit(j, a.out);
  return 0;
}

int run_exp(const ExpArgs& a) {
  SweepConfig config = SweepConfig::from_json(read_json(a.config));
  if (config.name.empty()) config.name = a.experiment;
  const SweepResult r = run_experiment(a.experiment, config);
  write_outputs(r, config, a.out_dir);
  for (const auto& ag : r.aggregates)
    std::cout << ag.n << ' ' << ag.metric << " median=" << format_double(ag.median)
              << " iqr=" << format_double(ag.iqr) << '\n';
  return 0;
}

int run_gradcheck(const GradArgs& a) {
  const GradcheckReport r = gradcheck(grad_target_from_string(a.target), a.seed, a.step);
  std::cout << to_string(r.target) << " seed=" << r.seed << " step=" << format_double(r.step)
            << " entries=" << r.entries << " max_rel_error=" << format_double(r.max_rel_error)
            << (r.pass ? " PASS" : " FAIL") << '\n';
  return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsne-lab: tSNE energies, bandwidth calibration and large-sample experiments"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sc = app.add_subcommand("sample", "Draw points from a density descriptor");
  sc->add_option("--density", sa.density, "Density JSON")->required()->check(CLI::ExistingFile);
  sc->add_option("-n,--n", sa.n, "Number of points")->check(CLI::PositiveNumber);
  sc->add_option("--seed", sa.seed, "Sampling seed");
  sc->add_option("--out", sa.out, "Output CSV ('-' for stdout)");

  CalibrateArgs ca;
  auto* cc = app.add_subcommand("calibrate", "Solve per-point bandwidths for kappa * n * h^d");
  cc->set_help_flag("--help", "Print this help message and exit");
  cc->add_option("--data", ca.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  cc->add_option("--kappa", ca.kappa, "Perplexity parameter")->check(CLI::PositiveNumber);
  cc->add_option("--h", ca.h, "Bandwidth scale (default n^(-1/(d+1)))");
  cc->add_option("--tol", ca.tol, "Relative perplexity tolerance")->check(CLI::PositiveNumber);
  cc->add_option("--out", ca.out, "Profile CSV")->required();

  EnergyArgs ea;
  auto* ec = app.add_subcommand("energy", "Decompose the KL objective of an embedding");
  ec->add_option("--data", ea.data)->required()->check(CLI::ExistingFile);
  ec->add_option("--profile", ea.profile)->required()->check(CLI::ExistingFile);
  ec->add_option("--embedding", ea.embedding)->required()->check(CLI::ExistingFile);
  ec->add_option("--variant", ea.variant)->check(CLI::IsMember({"classic", "rescaled"}));
  ec->add_flag("--inclusive-repulsion", ea.inclusive,
               "Include the diagonal kernel terms in the repulsion sum");
  ec->add_option("--out", ea.out, "Output JSON ('-' for stdout)");

  EmbedArgs ma;
  auto* mc = app.add_subcommand("embed", "Minimize the classic or rescaled energy");
  mc->add_option("--data", ma.data)->required()->check(CLI::ExistingFile);
  mc->add_option("--profile", ma.profile)->required()->check(CLI::ExistingFile);
  mc->add_option("--variant", ma.variant)->check(CLI::IsMember({"classic", "rescaled"}));
  mc->add_option("--config", ma.config, "Optimizer JSON")->check(CLI::ExistingFile);
  mc->add_option("--out-embedding", ma.out_embedding)->required();
  mc->add_option("--out-trace", ma.out_trace);

  ContinuumArgs ka;
  auto* kc = app.add_subcommand("continuum", "Limiting energy of a smooth map or grid map");
  kc->add_option("--density", ka.density)->required()->check(CLI::ExistingFile);
  kc->add_option("--map", ka.map, "SmoothMap JSON or GridMap CSV")
      ->required()
      ->check(CLI::ExistingFile);
  kc->add_option("--kappa", ka.kappa)->check(CLI::PositiveNumber);
  kc->add_option("--grid", ka.grid, "Quadrature nodes per axis")->delimiter(',');
  kc->add_option("--residual-form", ka.form)
      ->check(CLI::IsMember({"variational", "displayed"}));
  kc->add_option("--out", ka.out, "Output JSON ('-' for stdout)");

  ExpArgs xa;
  auto* xc = app.add_subcommand("exp", "Run an experiment sweep");
  xc->add_option("experiment", xa.experiment)
      ->required()
      ->check(CLI::IsMember({"bandwidth", "consistency", "illposed", "rescaled", "el"}));
  xc->add_option("--config", xa.config, "Sweep JSON")->required()->check(CLI::ExistingFile);
  xc->add_option("--out-dir", xa.out_dir);

  GradArgs ga;
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  gc->add_option("target", ga.target)
      ->check(CLI::IsMember({"discrete-classic", "discrete-rescaled", "gridmap"}));
  gc->add_option("--seed", ga.seed);
  gc->add_option("--step", ga.step)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sc) return run_sample(sa);
    if (*cc) return run_calibrate(ca);
    if (*ec) return run_energy(ea);
    if (*mc) return run_embed(ma);
    if (*kc) return run_continuum(ka);
    if (*xc) return run_exp(xa);
    if (*gc) return run_gradcheck(ga);
  } catch (const std::exception& e) {
    std::cerr << "tsne-lab: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
