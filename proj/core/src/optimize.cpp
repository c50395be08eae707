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


#include "tsnelab/optimize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsnelab {

namespace {

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::gaussian: return "gaussian";
    case InitKind::pca: return "pca";
    case InitKind::given: return "given";
  }
  return "gaussian";
}

InitKind init_kind_from_string(const std::string& s) {
  if (s == "gaussian") return InitKind::gaussian;
  if (s == "pca" || s == "pca-like") return InitKind::pca;
  if (s == "given") return InitKind::given;
  throw std::invalid_argument("unknown init kind '" + s + "'");
}

double max_row_norm(const Matrix& g) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) best = std::max(best, g.row(i).norm());
  return best;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double scale, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x696e6974));
  Matrix y(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index k = 0; k < y.cols(); ++k) y(i, k) = scale * rng.normal();
  return y;
}

// Tracks consecutive increases of the objective on evaluated steps. Changes
// within kRoundoff relative of the previous value are summation noise near a
// minimum and neither count nor reset.
class DivergenceGuard {
 public:
  static constexpr double kRoundoff = 1e-12;

  DivergenceGuard(std::size_t window, std::size_t every)
      : limit_(std::max<std::size_t>(1, (window + every - 1) / every)) {}

  void reset() { prev_ = std::numeric_limits<double>::infinity(), count_ = 0; }

  void observe(double objective, std::size_t step) {
    if (!std::isfinite(objective))
      throw DivergenceError("non-finite energy at step " + std::to_string(step), step);
    if (std::isfinite(prev_) && std::abs(objective - prev_) <= kRoundoff * std::abs(prev_)) return;
    count_ = objective > prev_ ? count_ + 1 : 0;
    prev_ = objective;
    if (count_ >= limit_)
      throw DivergenceError("diverging: energy increased on " + std::to_string(count_) +
                                " consecutive evaluations up to step " + std::to_string(step),
                            step);
  }

 private:
  std::size_t limit_;
  double prev_ = std::numeric_limits<double>::infinity();
  std::size_t count_ = 0;
};

void check_finite_gradient(const Matrix& g, std::size_t step) {
  if (!g.allFinite())
    throw DivergenceError("non-finite gradient at step " + std::to_string(step), step);
}

}  // namespace

// ---------------------------------------------------------------------------

void OptimizerConfig::validate() const {
  if (steps == 0) throw std::invalid_argument("optimizer: steps must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("optimizer: learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("optimizer: momentum must be in [0, 1)");
  if (!(exaggeration_factor >= 1.0)) throw std::invalid_argument("optimizer: exaggeration_factor must be >= 1");
  if (exaggeration_steps > steps) throw std::invalid_argument("optimizer: exaggeration_steps exceeds steps");
  if (!(convergence_tol > 0.0)) throw std::invalid_argument("optimizer: convergence_tol must be positive");
  if (embedding_dim == 0) throw std::invalid_argument("optimizer: embedding_dim must be positive");
  if (record_every == 0 || energy_every == 0 || divergence_window == 0)
    throw std::invalid_argument("optimizer: record_every, energy_every and divergence_window must be positive");
  if (!(init.scale > 0.0)) throw std::invalid_argument("optimizer: init scale must be positive");
  if (init.kind == InitKind::given && !init.given)
    throw std::invalid_argument("optimizer: init 'given' needs values");
}

OptimizerConfig OptimizerConfig::from_json(const nlohmann::json& j) {
  OptimizerConfig c;
  c.steps = j.value("steps", c.steps);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.momentum = j.value("momentum", c.momentum);
  c.exaggeration_factor = j.value("exaggeration_factor", c.exaggeration_factor);
  c.exaggeration_steps = j.value("exaggeration_steps", c.exaggeration_steps);
  c.convergence_tol = j.value("convergence_tol", c.convergence_tol);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.record_every = j.value("record_every", c.record_every);
  c.divergence_window = j.value("divergence_window", c.divergence_window);
  c.energy_every = j.value("energy_every", c.energy_every);
  if (j.contains("repulsion")) {
    const auto r = j["repulsion"].get<std::string>();
    if (r == "exclusive") c.repulsion = RepulsionSum::exclusive;
    else if (r == "inclusive") c.repulsion = RepulsionSum::inclusive;
    else throw std::invalid_argument("optimizer: unknown repulsion '" + r + "'");
  }
  c.use_neighbor_grid = j.value("use_neighbor_grid", c.use_neighbor_grid);
  if (j.contains("init")) {
    const auto& i = j["init"];
    c.init.kind = init_kind_from_string(i.value("kind", std::string("gaussian")));
    c.init.scale = i.value("scale", c.init.scale);
    c.init.seed = i.value("seed", c.init.seed);
    if (i.contains("values")) {
      const auto& rows = i["values"];
      Matrix v(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size()));
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t k = 0; k < rows[r].size(); ++k)
          v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k].get<double>();
      c.init.given = std::move(v);
    }
  }
  c.validate();
  return c;
}

nlohmann::json OptimizerConfig::to_json() const {
  nlohmann::json j = {{"steps", steps},
                      {"learning_rate", learning_rate},
                      {"momentum", momentum},
                      {"exaggeration_factor", exaggeration_factor},
                      {"exaggeration_steps", exaggeration_steps},
                      {"convergence_tol", convergence_tol},
                      {"embedding_dim", embedding_dim},
                      {"record_every", record_every},
                      {"divergence_window", divergence_window},
                      {"energy_every", energy_every},
                      {"repulsion", repulsion == RepulsionSum::inclusive ? "inclusive" : "exclusive"},
                      {"use_neighbor_grid", use_neighbor_grid}};
  nlohmann::json i = {{"kind", to_string(init.kind)}, {"scale", init.scale}, {"seed", init.seed}};
  if (init.given) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < init.given->rows(); ++r) {
      auto row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < init.given->cols(); ++k) row.push_back((*init.given)(r, k));
      rows.push_back(row);
    }
    i["values"] = rows;
  }
  j["init"] = i;
  return j;
}

// ---------------------------------------------------------------------------

double diameter(const Matrix& y) {
  const std::size_t n = static_cast<std::size_t>(y.rows()), m = static_cast<std::size_t>(y.cols());
  const double* Y = y.data();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, squared_distance(Y + i * m, Y + j * m, m));
  return std::sqrt(best);
}

double rms_spread(const Matrix& y) {
  if (y.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = y.colwise().mean();
  return std::sqrt((y.rowwise() - mean).rowwise().squaredNorm().mean());
}

Matrix initial_embedding(const Dataset& data, const OptimizerConfig& config) {
  const std::size_t n = data.size(), m = config.embedding_dim;
  switch (config.init.kind) {
    case InitKind::given: {
      const Matrix& g = *config.init.given;
      if (static_cast<std::size_t>(g.rows()) != n || static_cast<std::size_t>(g.cols()) != m)
        throw std::invalid_argument("optimizer: given init has the wrong shape");
      return g;
    }
    case InitKind::gaussian:
      return gaussian_matrix(n, m, config.init.scale, config.init.seed);
    case InitKind::pca: {
      const Eigen::RowVectorXd mean = data.points.colwise().mean();
      const Matrix centered = data.points.rowwise() - mean;
      const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
      const Eigen::Index d = cov.rows();
      Matrix y = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
      const Eigen::Index used = std::min<Eigen::Index>(d, static_cast<Eigen::Index>(m));
      for (Eigen::Index c = 0; c < used; ++c) {
        Eigen::VectorXd axis = eig.eigenvectors().col(d - 1 - c);
        Eigen::Index arg;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis[arg] < 0.0) axis = -axis;
        y.col(c) = centered * axis;
      }
      const double lead = std::sqrt(y.col(0).squaredNorm() / static_cast<double>(n));
      if (lead > 0.0) y *= config.init.scale / lead;
      return y;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------

DiscreteResult minimize_discrete(const Dataset& data, const BandwidthProfile& profile,
                                 Variant variant, const OptimizerConfig& config) {
  config.validate();
  const DiscreteEnergy energy(data, profile, {config.repulsion, config.use_neighbor_grid});
  return minimize_discrete(energy, initial_embedding(data, config), variant, config);
}

DiscreteResult minimize_discrete(const DiscreteEnergy& energy, Matrix init, Variant variant,
                                 const OptimizerConfig& config) {
  config.validate();
  const std::size_t n = energy.size();
  if (static_cast<std::size_t>(init.rows()) != n)
    throw std::invalid_argument("optimizer: init has the wrong number of rows");
  const double wa = energy.attraction_weight(variant);
  const double rate = config.learning_rate * static_cast<double>(n) / wa;

  DiscreteResult out;
  Matrix y = std::move(init);
  Matrix vel = Matrix::Zero(y.rows(), y.cols());
  DivergenceGuard guard(config.divergence_window, config.energy_every);
  auto& trace = out.trace;

  auto record = [&](std::size_t step, const DiscreteEvaluation& ev, double gnorm) {
    trace.records.push_back({step, ev.attract, ev.repulse, wa * ev.attract + ev.repulse, gnorm,
                             diameter(y), rms_spread(y)});
  };

  std::size_t step = 0;
  for (; step < config.steps; ++step) {
    const bool exaggerated = step < config.exaggeration_steps;
    if (step == config.exaggeration_steps) guard.reset();
    const double alpha = exaggerated ? config.exaggeration_factor : 1.0;
    const bool recording = step % config.record_every == 0;
    const bool energies = recording || step % config.energy_every == 0;
    if (!y.allFinite()) throw DivergenceError("non-finite embedding at step " + std::to_string(step), step);
    const auto ev = energy.evaluate(y, energies, true);
    const Matrix g = (alpha * wa) * ev.grad_attract + ev.grad_repulse;
    check_finite_gradient(g, step);
    if (energies) guard.observe(alpha * wa * ev.attract + ev.repulse, step);
    const double gnorm = max_row_norm(g);
    if (recording) record(step, ev, gnorm);
    if (gnorm <= config.convergence_tol) {
      trace.converged = true;
      if (!recording) record(step, energy.evaluate(y, true, false), gnorm);
      break;
    }
    vel = config.momentum * vel - rate * g;
    y += vel;
  }
  if (!trace.converged) {
    if (!y.allFinite()) throw DivergenceError("non-finite embedding at step " + std::to_string(step), step);
    auto ev = energy.evaluate(y, true, true);
    const double alpha = step < config.exaggeration_steps ? config.exaggeration_factor : 1.0;
    const Matrix g = (alpha * wa) * ev.grad_attract + ev.grad_repulse;
    check_finite_gradient(g, step);
    if (!std::isfinite(ev.attract) || !std::isfinite(ev.repulse))
      throw DivergenceError("non-finite energy at step " + std::to_string(step), step);
    const double gnorm = max_row_norm(g);
    trace.converged = gnorm <= config.convergence_tol;
    record(step, ev, gnorm);
  }
  trace.steps_taken = step;
  out.embedding.y = std::move(y);
  return out;
}

// ---------------------------------------------------------------------------

Matrix initial_gridmap(const QuadratureGrid& grid, const OptimizerConfig& config) {
  const std::size_t g = grid.size(), m = config.embedding_dim, d = grid.dim();
  switch (config.init.kind) {
    case InitKind::given: {
      const Matrix& v = *config.init.given;
      if (static_cast<std::size_t>(v.rows()) != g || static_cast<std::size_t>(v.cols()) != m)
        throw std::invalid_argument("optimizer: given grid init has the wrong shape");
      return v;
    }
    case InitKind::gaussian:
      return gaussian_matrix(g, m, config.init.scale, config.init.seed);
    case InitKind::pca: {
      // Linear ramps along the longest axes, unit RMS on a uniform law before scaling.
      std::vector<std::size_t> axes(d);
      for (std::size_t k = 0; k < d; ++k) axes[k] = k;
      std::stable_sort(axes.begin(), axes.end(), [&](std::size_t a, std::size_t b) {
        return grid.domain().extent(a) > grid.domain().extent(b);
      });
      Matrix v = Matrix::Zero(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(m));
      for (std::size_t c = 0; c < std::min(d, m); ++c) {
        const std::size_t k = axes[c];
        const double lo = grid.domain().lower()[k], len = grid.domain().extent(k);
        const double scale = config.init.scale * std::sqrt(12.0) / len;
        for (std::size_t a = 0; a < g; ++a)
          v(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) =
              scale * (grid.node(a)[k] - lo - 0.5 * len);
      }
      return v;
    }
  }
  return {};
}

GridResult minimize_gridmap(const Density& density, double kappa, const QuadratureGrid& grid,
                            const OptimizerConfig& config) {
  config.validate();
  const GridEnergy energy(density, grid, kappa);
  const double rate = config.learning_rate / energy.stiffness();
  Matrix t = initial_gridmap(grid, config);
  Matrix vel = Matrix::Zero(t.rows(), t.cols());
  DivergenceGuard guard(config.divergence_window, config.energy_every);
  OptimizationTrace trace;

  auto record = [&](std::size_t step, const GridObjective& obj, double gnorm) {
    const GridMap snapshot(grid, t);
    trace.records.push_back({step, obj.dirichlet, obj.repulse, obj.total(), gnorm, diameter(t),
                             weighted_rms_spread(snapshot, energy.rho())});
  };

  std::size_t step = 0;
  for (; step < config.steps; ++step) {
    if (!t.allFinite()) throw DivergenceError("non-finite grid map at step " + std::to_string(step), step);
    const auto obj = energy.evaluate(t, true);
    check_finite_gradient(obj.gradient, step);
    const bool recording = step % config.record_every == 0;
    if (recording || step % config.energy_every == 0) guard.observe(obj.total(), step);
    const double gnorm = max_row_norm(obj.gradient);
    if (recording) record(step, obj, gnorm);
    if (gnorm <= config.convergence_tol) {
      trace.converged = true;
      if (!recording) record(step, obj, gnorm);
      break;
    }
    vel = config.momentum * vel - rate * obj.gradient;
    t += vel;
  }
  if (!trace.converged) {
    if (!t.allFinite()) throw DivergenceError("non-finite grid map at step " + std::to_string(step), step);
    const auto obj = energy.evaluate(t, true);
    check_finite_gradient(obj.gradient, step);
    const double gnorm = max_row_norm(obj.gradient);
    trace.converged = gnorm <= config.convergence_tol;
    record(step, obj, gnorm);
  }
  trace.steps_taken = step;

  GridMap result(grid, std::move(t));
  const Vector mean = weighted_mean(result, energy.rho());
  result.values.rowwise() -= mean.transpose();
  return {std::move(result), std::move(trace)};
}

// ---------------------------------------------------------------------------

std::string to_string(GradTarget t) {
  switch (t) {
    case GradTarget::discrete_classic: return "discrete-classic";
    case GradTarget::discrete_rescaled: return "discrete-rescaled";
    case GradTarget::gridmap: return "gridmap";
  }
  return "discrete-classic";
}

GradTarget grad_target_from_string(const std::string& s) {
  if (s == "discrete-classic") return GradTarget::discrete_classic;
  if (s == "discrete-rescaled") return GradTarget::discrete_rescaled;
  if (s == "gridmap") return GradTarget::gridmap;
  throw std::invalid_argument("unknown gradcheck target '" + s + "'");
}

namespace {

template <class Energy>
double max_relative_error(const Matrix& analytic, Matrix x, double step, Energy&& energy) {
  const double floor = std::max(1e-3 * analytic.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double keep = x(i, k);
      x(i, k) = keep + step;
      const double up = energy(x);
      x(i, k) = keep - step;
      const double down = energy(x);
      x(i, k) = keep;
      const double fd = (up - down) / (2.0 * step);
      const double a = analytic(i, k);
      worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor}));
    }
  return worst;
}

}  // namespace

GradcheckReport gradcheck(GradTarget target, std::uint64_t seed, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("gradcheck: step must be positive");
  GradcheckReport report{target, seed, step, 0.0, 0, false};
  Rng rng(derive_seed(seed, 0x67726164));

  if (target == GradTarget::gridmap) {
    const auto density = Density::gaussian_mixture(Domain::unit(1), {{{0.4}, {0.3}, 1.0}});
    const QuadratureGrid grid(Domain::unit(1), {16});
    const GridEnergy energy(density, grid, 1.0);
    Matrix t(16, 2);
    for (Eigen::Index a = 0; a < t.rows(); ++a)
      for (Eigen::Index l = 0; l < t.cols(); ++l) t(a, l) = 0.5 * rng.normal();
    const Matrix analytic = energy.evaluate(t, true).gradient * grid.weight();
    report.max_rel_error = max_relative_error(
        analytic, t, step, [&](const Matrix& v) { return energy.evaluate(v, false).total(); });
    report.entries = static_cast<std::size_t>(t.size());
  } else {
    const std::size_t n = 16;
    Matrix x(n, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = rng.uniform();
    const Dataset data = make_dataset(std::move(x));
    BandwidthProfile profile = uniform_profile(n, 1.0, 0.3);
    for (auto& s : profile.sigmas) s = 0.1 + 0.2 * rng.uniform();
    const DiscreteEnergy energy(data, profile);
    Matrix y(n, 2);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      for (Eigen::Index k = 0; k < y.cols(); ++k) y(i, k) = rng.normal();
    const Variant v = target == GradTarget::discrete_rescaled ? Variant::rescaled : Variant::classic;
    const double wa = energy.attraction_weight(v);
    const auto ev = energy.evaluate(y, false, true);
    const Matrix analytic = wa * ev.grad_attract + ev.grad_repulse;
    report.max_rel_error = max_relative_error(analytic, y, step, [&](const Matrix& z) {
      const auto e = energy.evaluate(z, true, false);
      return wa * e.attract + e.repulse;
    });
    report.entries = static_cast<std::size_t>(y.size());
  }
  report.pass = report.max_rel_error <= 1e-5;
  return report;
}

}  // namespace tsnelab
