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

#include "tsnelab/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tsnelab {

namespace {

double continuum_constant(double kappa, std::size_t d) {
  return std::pow(kappa, 2.0 / static_cast<double>(d)) / kTwoPiE;
}

void check_grid(const Density& density, const QuadratureGrid& grid) {
  if (!(grid.domain() == density.domain()))
    throw std::invalid_argument("quadrature grid domain differs from density domain");
}

Matrix map_at_nodes(const SmoothMap& map, const QuadratureGrid& grid) {
  if (map.input_dim() != grid.dim()) throw std::invalid_argument("map dimension mismatch");
  const std::size_t m = map.output_dim();
  Matrix t(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < grid.size(); ++a) map.eval(grid.node(a), t.data() + a * m);
  return t;
}

double max_spacing(const QuadratureGrid& grid) {
  double s = 0.0;
  for (std::size_t k = 0; k < grid.dim(); ++k) s = std::max(s, grid.spacing(k));
  return s;
}

// Integral over x of rho(x) * [sum_b K_ab f(|dT|^2) rho_b] / [sum_b K_ab rho_b],
// K_ab = exp(-|x_a - x_b|^2 / (2 h^2 sigma_kappa(x_a)^2)).
template <class F>
ContinuumValue localized_ratio(const Density& density, const SmoothMap& map, double kappa,
                               double h, const QuadratureGrid& grid, F f) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth scale h must be positive");
  check_grid(density, grid);
  const std::size_t g = grid.size(), d = grid.dim(), m = map.output_dim();
  const Matrix t = map_at_nodes(map, grid);
  const auto rho = node_density(density, grid);
  const double* X = grid.nodes().data();
  const double* T = t.data();
  const double dx = max_spacing(grid);

  ContinuumValue out;
  double total = 0.0;
  for (std::size_t a = 0; a < g; ++a) {
    const double width = h * limit_bandwidth(density, kappa, grid.node(a));
    if (width < 4.0 * dx) out.coarse_grid = true;
    const double inv = 1.0 / (2.0 * width * width);
    double num = 0.0, den = 0.0;
    for (std::size_t b = 0; b < g; ++b) {
      const double u = squared_distance(X + a * d, X + b * d, d) * inv;
      if (u > kNegligibleExponent) continue;
      const double k = std::exp(-u) * rho[b];
      den += k;
      if (b != a) num += k * f(squared_distance(T + a * m, T + b * m, m));
    }
    total += num / den * rho[a];
  }
  out.value = total * grid.weight();
  return out;
}

double repulsion_sum(const Matrix& t, const std::vector<double>& rho) {
  const std::size_t g = static_cast<std::size_t>(t.rows()), m = static_cast<std::size_t>(t.cols());
  const double* T = t.data();
  double off = 0.0, diag = 0.0;
  for (std::size_t a = 0; a < g; ++a) {
    diag += rho[a] * rho[a];
    double row = 0.0;
    for (std::size_t b = a + 1; b < g; ++b)
      row += rho[b] / (1.0 + squared_distance(T + a * m, T + b * m, m));
    off += rho[a] * row;
  }
  return diag + 2.0 * off;
}

}  // namespace

double dirichlet_weight(const Density& density, double kappa, std::span<const double> x) {
  const std::size_t d = density.dim();
  return continuum_constant(kappa, d) * std::pow(density(x), 1.0 - 2.0 / static_cast<double>(d));
}

ContinuumValue averaged_attraction(const Density& density, const SmoothMap& map, double kappa,
                                   double h, const QuadratureGrid& grid) {
  return localized_ratio(density, map, kappa, h, grid, [](double u) { return std::log1p(u); });
}

ContinuumValue nonlocal_smoothness(const Density& density, const SmoothMap& map, double kappa,
                                   double h, const QuadratureGrid& grid) {
  return localized_ratio(density, map, kappa, h, grid, [](double u) { return u; });
}

double averaged_repulsion(const Density& density, const SmoothMap& map, const QuadratureGrid& grid) {
  check_grid(density, grid);
  const double w = grid.weight();
  return std::log(repulsion_sum(map_at_nodes(map, grid), node_density(density, grid)) * w * w);
}

ConditionalMoments conditional_moments(const Density& density, const SmoothMap& map, double kappa,
                                       std::span<const double> x, double h,
                                       const QuadratureGrid& grid) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth scale h must be positive");
  check_grid(density, grid);
  const std::size_t d = grid.dim(), m = map.output_dim();
  const double width = h * limit_bandwidth(density, kappa, x);
  const double inv = 1.0 / (2.0 * width * width);
  const Vector tx = map(x);
  Vector tb(static_cast<Eigen::Index>(m));
  double u = 0.0, v = 0.0;
  for (std::size_t b = 0; b < grid.size(); ++b) {
    const auto xb = grid.node(b);
    const double e = squared_distance(x.data(), xb.data(), d) * inv;
    if (e > kNegligibleExponent) continue;
    const double k = std::exp(-e) * density.eval_unchecked(xb);
    map.eval(xb, tb.data());
    v += k;
    u += k * std::log1p((tx - tb).squaredNorm());
  }
  const double dd = static_cast<double>(d);
  ConditionalMoments out;
  out.u = u * grid.weight() / std::pow(h, dd + 2.0);
  out.v = v * grid.weight() / std::pow(h, dd);
  out.coarse_grid = width < 4.0 * max_spacing(grid);
  return out;
}

double moment_lower_bound(const Density& density, double kappa, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth scale h must be positive");
  const std::size_t d = density.dim();
  const auto b = density.bounds();
  double corner = 1.0;
  for (std::size_t k = 0; k < d; ++k)
    corner *= std::sqrt(std::numbers::pi / 2.0) *
              std::erf(density.domain().extent(k) / (h * std::numbers::sqrt2));
  return continuum_constant(kappa, d) / std::pow(b.upper, 2.0 / static_cast<double>(d)) * b.lower *
         corner;
}

double moment_upper_bound(const Density& density, const SmoothMap& map, double kappa,
                          const QuadratureGrid& scan) {
  const std::size_t d = density.dim();
  const double dd = static_cast<double>(d);
  const auto b = density.bounds();
  const double sigma_max = std::pow(kappa / b.lower, 1.0 / dd) / std::sqrt(kTwoPiE);
  double jac = 0.0;
  for (std::size_t a = 0; a < scan.size(); ++a) jac = std::max(jac, map.gradient_norm2(scan.node(a)));
  return dd * std::pow(2.0 * std::numbers::pi, dd / 2.0) * std::pow(sigma_max, dd + 2.0) * b.upper * jac;
}

double dirichlet_target(const Density& density, const SmoothMap& map, double kappa,
                        const QuadratureGrid& grid) {
  check_grid(density, grid);
  double s = 0.0;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const auto x = grid.node(a);
    const double sigma = limit_bandwidth(density, kappa, x);
    s += sigma * sigma * map.gradient_norm2(x) * density.eval_unchecked(x);
  }
  return s * grid.weight();
}

EnergyBreakdown continuum_energy(const Density& density, const SmoothMap& map, double kappa,
                                 const QuadratureGrid& grid) {
  check_grid(density, grid);
  double s = 0.0;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    const auto x = grid.node(a);
    s += dirichlet_weight(density, kappa, x) * map.gradient_norm2(x);
  }
  EnergyBreakdown out;
  out.attract = s * grid.weight();
  out.repulse = averaged_repulsion(density, map, grid);
  out.total_kl = out.attract + out.repulse;
  return out;
}

// ---------------------------------------------------------------------------

GridMap::GridMap(QuadratureGrid g, Matrix v) : grid(std::move(g)), values(std::move(v)) {
  if (static_cast<std::size_t>(values.rows()) != grid.size())
    throw std::invalid_argument("GridMap: one row of values per grid node");
  if (values.cols() < 1) throw std::invalid_argument("GridMap: need at least one output");
  if (!values.allFinite()) throw std::invalid_argument("GridMap: values must be finite");
}

GridMap GridMap::sample(const SmoothMap& map, QuadratureGrid grid) {
  Matrix v = map_at_nodes(map, grid);
  return GridMap(std::move(grid), std::move(v));
}

std::vector<double> node_density(const Density& density, const QuadratureGrid& grid) {
  std::vector<double> rho(grid.size());
  for (std::size_t a = 0; a < grid.size(); ++a) rho[a] = density.eval_unchecked(grid.node(a));
  return rho;
}

Vector weighted_mean(const GridMap& map, const std::vector<double>& rho) {
  Vector mean = Vector::Zero(map.values.cols());
  double mass = 0.0;
  for (std::size_t a = 0; a < map.size(); ++a) {
    mean += rho[a] * map.values.row(static_cast<Eigen::Index>(a)).transpose();
    mass += rho[a];
  }
  return mean / mass;
}

double weighted_rms_spread(const GridMap& map, const std::vector<double>& rho) {
  const Vector mean = weighted_mean(map, rho);
  double s = 0.0, mass = 0.0;
  for (std::size_t a = 0; a < map.size(); ++a) {
    s += rho[a] * (map.values.row(static_cast<Eigen::Index>(a)).transpose() - mean).squaredNorm();
    mass += rho[a];
  }
  return std::sqrt(s / mass);
}

namespace {

std::vector<std::size_t> strides(const QuadratureGrid& grid) {
  const std::size_t d = grid.dim();
  std::vector<std::size_t> s(d, 1);
  for (std::size_t k = d - 1; k-- > 0;) s[k] = s[k + 1] * grid.counts()[k + 1];
  return s;
}

std::size_t axis_index(std::size_t a, std::size_t stride, std::size_t count) {
  return (a / stride) % count;
}

}  // namespace

EnergyBreakdown continuum_energy(const Density& density, const GridMap& map, double kappa) {
  const auto& grid = map.grid;
  check_grid(density, grid);
  const std::size_t d = grid.dim(), m = map.output_dim(), g = grid.size();
  for (auto c : grid.counts())
    if (c < 3) throw std::invalid_argument("continuum_energy: need at least 3 nodes per axis");
  const auto st = strides(grid);
  const auto rho = node_density(density, grid);
  const double c = continuum_constant(kappa, d);
  const double expo = 1.0 - 2.0 / static_cast<double>(d);
  const double* T = map.values.data();

  double dir = 0.0;
  for (std::size_t a = 0; a < g; ++a) {
    double grad2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t n = grid.counts()[k], i = axis_index(a, st[k], n), s = st[k];
      const double inv = 1.0 / (2.0 * grid.spacing(k));
      for (std::size_t l = 0; l < m; ++l) {
        auto v = [&](std::size_t node) { return T[node * m + l]; };
        double dv;
        if (i == 0)
          dv = (-3.0 * v(a) + 4.0 * v(a + s) - v(a + 2 * s)) * inv;
        else if (i == n - 1)
          dv = (3.0 * v(a) - 4.0 * v(a - s) + v(a - 2 * s)) * inv;
        else
          dv = (v(a + s) - v(a - s)) * inv;
        grad2 += dv * dv;
      }
    }
    dir += std::pow(rho[a], expo) * grad2;
  }
  EnergyBreakdown out;
  out.attract = c * dir * grid.weight();
  out.repulse = std::log(repulsion_sum(map.values, rho) * grid.weight() * grid.weight());
  out.total_kl = out.attract + out.repulse;
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(ResidualForm form) {
  return form == ResidualForm::displayed ? "displayed" : "variational";
}

ResidualForm residual_form_from_string(const std::string& s) {
  if (s == "variational") return ResidualForm::variational;
  if (s == "displayed") return ResidualForm::displayed;
  throw std::invalid_argument("unknown residual form '" + s + "'");
}

GridEnergy::GridEnergy(const Density& density, const QuadratureGrid& grid, double kappa)
    : grid_(&grid), c_(continuum_constant(kappa, grid.dim())) {
  check_grid(density, grid);
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  const std::size_t d = grid.dim(), g = grid.size();
  for (auto c : grid.counts())
    if (c < 3) throw std::invalid_argument("grid map needs at least 3 nodes per axis");
  rho_ = node_density(density, grid);
  stride_ = strides(grid);
  const double expo = 1.0 - 2.0 / static_cast<double>(d);
  face_w_.assign(d, std::vector<double>(g, 0.0));
  double w_max = 0.0, lap = 0.0;
  std::vector<double> mid(d);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t n = grid.counts()[k];
    for (std::size_t a = 0; a < g; ++a) {
      if (axis_index(a, stride_[k], n) + 1 >= n) continue;
      const auto x = grid.node(a);
      std::copy(x.begin(), x.end(), mid.begin());
      mid[k] += 0.5 * grid.spacing(k);
      face_w_[k][a] = std::pow(density.eval_unchecked(mid), expo);
      w_max = std::max(w_max, face_w_[k][a]);
    }
    lap += 4.0 / (grid.spacing(k) * grid.spacing(k));
  }
  stiffness_ = 2.0 * c_ * w_max * lap;
}

Matrix GridEnergy::divergence(const Matrix& values) const {
  const auto& grid = *grid_;
  const std::size_t d = grid.dim(), g = grid.size(), m = static_cast<std::size_t>(values.cols());
  Matrix div = Matrix::Zero(values.rows(), values.cols());
  const double* T = values.data();
  double* D = div.data();
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t n = grid.counts()[k], s = stride_[k];
    const double inv = c_ / (grid.spacing(k) * grid.spacing(k));
    for (std::size_t a = 0; a < g; ++a) {
      if (axis_index(a, s, n) + 1 >= n) continue;
      const double w = face_w_[k][a] * inv;
      for (std::size_t l = 0; l < m; ++l) {
        const double flux = w * (T[(a + s) * m + l] - T[a * m + l]);
        D[a * m + l] += flux;
        D[(a + s) * m + l] -= flux;
      }
    }
  }
  return div;
}

namespace {

// Off-diagonal part of the repulsion double sum and, when N is set, the
// unscaled nonlocal field; M > 0 fixes the output dimension at compile time.
template <std::size_t M>
double nonlocal_pass(const double* T, const std::vector<double>& rho, std::size_t g, std::size_t m,
                     double* N) {
  const std::size_t mm = M ? M : m;
  double off = 0.0;
  std::vector<double> buf(M ? 0 : 2 * m);
  for (std::size_t a = 0; a < g; ++a) {
    double ta[M ? M : 1], acc[M ? M : 1];
    double* pa = M ? ta : buf.data();
    double* pn = M ? acc : buf.data() + m;
    for (std::size_t l = 0; l < mm; ++l) pa[l] = T[a * mm + l], pn[l] = 0.0;
    const double ra = rho[a];
    double row = 0.0;
    for (std::size_t b = a + 1; b < g; ++b) {
      const double* tb = T + b * mm;
      double d2 = 0.0;
      for (std::size_t l = 0; l < mm; ++l) d2 += (pa[l] - tb[l]) * (pa[l] - tb[l]);
      const double k = 1.0 / (1.0 + d2);
      row += rho[b] * k;
      if (N) {
        const double kk = k * k;
        for (std::size_t l = 0; l < mm; ++l) {
          const double diff = pa[l] - tb[l];
          pn[l] += rho[b] * kk * diff;
          N[b * mm + l] -= ra * kk * diff;
        }
      }
    }
    if (N)
      for (std::size_t l = 0; l < mm; ++l) N[a * mm + l] += pn[l];
    off += ra * row;
  }
  return off;
}

}  // namespace

double GridEnergy::nonlocal(const Matrix& values, Matrix* n) const {
  const std::size_t g = grid_->size(), m = static_cast<std::size_t>(values.cols());
  double* N = nullptr;
  if (n) {
    *n = Matrix::Zero(values.rows(), values.cols());
    N = n->data();
  }
  double diag = 0.0;
  for (std::size_t a = 0; a < g; ++a) diag += rho_[a] * rho_[a];
  const double off = m == 1   ? nonlocal_pass<1>(values.data(), rho_, g, m, N)
                     : m == 2 ? nonlocal_pass<2>(values.data(), rho_, g, m, N)
                              : nonlocal_pass<0>(values.data(), rho_, g, m, N);
  const double w = grid_->weight();
  if (n) *n *= w;
  return (diag + 2.0 * off) * w * w;
}

GridObjective GridEnergy::evaluate(const Matrix& values, bool with_gradient) const {
  const auto& grid = *grid_;
  if (static_cast<std::size_t>(values.rows()) != grid.size())
    throw std::invalid_argument("GridEnergy: one row of values per node");
  const std::size_t d = grid.dim(), g = grid.size(), m = static_cast<std::size_t>(values.cols());
  const double* T = values.data();
  GridObjective out;
  double dir = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t n = grid.counts()[k], s = stride_[k];
    const double inv = 1.0 / (grid.spacing(k) * grid.spacing(k));
    for (std::size_t a = 0; a < g; ++a) {
      if (axis_index(a, s, n) + 1 >= n) continue;
      double sq = 0.0;
      for (std::size_t l = 0; l < m; ++l) {
        const double dv = T[(a + s) * m + l] - T[a * m + l];
        sq += dv * dv;
      }
      dir += face_w_[k][a] * sq * inv;
    }
  }
  out.dirichlet = c_ * dir * grid.weight();
  Matrix nl;
  const double z = nonlocal(values, with_gradient ? &nl : nullptr);
  out.repulse = std::log(z);
  if (with_gradient) {
    out.gradient = -2.0 * divergence(values);
    for (std::size_t a = 0; a < g; ++a)
      out.gradient.row(static_cast<Eigen::Index>(a)) -= (4.0 * rho_[a] / z) * nl.row(static_cast<Eigen::Index>(a));
  }
  return out;
}

Matrix GridEnergy::residual(const Matrix& values, ResidualForm form) const {
  Matrix nl;
  const double z = nonlocal(values, &nl);
  Matrix r = divergence(values);
  for (std::size_t a = 0; a < grid_->size(); ++a) {
    const double coef = form == ResidualForm::variational ? 2.0 * rho_[a] / z : 4.0 / z;
    r.row(static_cast<Eigen::Index>(a)) += coef * nl.row(static_cast<Eigen::Index>(a));
  }
  return r;
}

GridObjective gridmap_objective(const Density& density, const GridMap& map, double kappa,
                                bool with_gradient) {
  return GridEnergy(density, map.grid, kappa).evaluate(map.values, with_gradient);
}

Matrix el_residual(const GridMap& map, const Density& density, double kappa, ResidualForm form) {
  return GridEnergy(density, map.grid, kappa).residual(map.values, form);
}

double boundary_flux(const GridMap& map) {
  const auto& grid = map.grid;
  const std::size_t d = grid.dim(), g = grid.size(), m = map.output_dim();
  const auto st = strides(grid);
  const double* T = map.values.data();
  double worst = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t n = grid.counts()[k];
    for (std::size_t a = 0; a < g; ++a) {
      const std::size_t i = axis_index(a, st[k], n);
      if (i != 0 && i + 1 != n) continue;
      // The ghost node mirrors node a across the boundary face.
      for (std::size_t l = 0; l < m; ++l) {
        const double ghost = T[a * m + l];
        worst = std::max(worst, std::abs(ghost - T[a * m + l]) / grid.spacing(k));
      }
    }
  }
  return worst;
}

}  // namespace tsnelab
