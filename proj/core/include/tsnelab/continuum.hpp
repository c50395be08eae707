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

#ifndef TSNELAB_CONTINUUM_HPP
#define TSNELAB_CONTINUUM_HPP

#include "tsnelab/density.hpp"
#include "tsnelab/energy.hpp"
#include "tsnelab/quadrature.hpp"
#include "tsnelab/smooth_map.hpp"

#include <span>
#include <string>
#include <vector>

namespace tsnelab {

/// Value of a kernel-localized population integral. `coarse_grid` is set when
/// some node has fewer than four grid spacings per kernel width h * sigma_kappa.
struct ContinuumValue {
  double value = 0.0;
  bool coarse_grid = false;
};

/// (kappa^(2/d) / (2 pi e)) * rho^(1 - 2/d); equals sigma_kappa^2 * rho.
double dirichlet_weight(const Density& density, double kappa, std::span<const double> x);

/// Averaged attraction: the rho-weighted mean over x of the kernel-normalized
/// average of log(1 + |T(x) - T(x')|^2), kernel width h * sigma_kappa(x).
ContinuumValue averaged_attraction(const Density& density, const SmoothMap& map, double kappa,
                                   double h, const QuadratureGrid& grid);

/// log of the double integral of (1 + |T(x) - T(x')|^2)^-1 rho(x) rho(x').
double averaged_repulsion(const Density& density, const SmoothMap& map, const QuadratureGrid& grid);

/// Same integral as averaged_attraction with |T(x) - T(x')|^2 in place of
/// log(1 + |T(x) - T(x')|^2).
ContinuumValue nonlocal_smoothness(const Density& density, const SmoothMap& map, double kappa,
                                   double h, const QuadratureGrid& grid);

struct ConditionalMoments {
  double u = 0.0;  // E[U | x]
  double v = 0.0;  // E[V | x]
  bool coarse_grid = false;
};

/// E[U|x] = h^-(d+2) int exp(-|x-x'|^2 / (2 h^2 sigma_kappa(x)^2)) log(1 + |T(x)-T(x')|^2) rho(x') dx'
/// and E[V|x] = h^-d int exp(...) rho(x') dx'.
ConditionalMoments conditional_moments(const Density& density, const SmoothMap& map, double kappa,
                                       std::span<const double> x, double h,
                                       const QuadratureGrid& grid);

/// Uniform lower bound on E[V|x]:
/// kappa^(2/d) / (2 pi e sup rho^(2/d)) * inf rho * inf_x int_{(Omega - x)/h} exp(-|v|^2/2) dv.
/// Valid for d <= 2 while sigma_kappa <= 1.
double moment_lower_bound(const Density& density, double kappa, double h);

/// Uniform upper bound on E[U|x]:
/// d (2 pi)^(d/2) sup sigma_kappa^(d+2) * sup rho * sup |DT|_F^2, the last
/// supremum scanned over `scan` nodes.
double moment_upper_bound(const Density& density, const SmoothMap& map, double kappa,
                          const QuadratureGrid& scan);

/// int sigma_kappa^2 sum_l |grad T_l|^2 rho dx, the limit of A_n / h^2.
double dirichlet_target(const Density& density, const SmoothMap& map, double kappa,
                        const QuadratureGrid& grid);

/// Limiting energy: attract is the weighted Dirichlet term, repulse the
/// averaged repulsion; total_kl holds their sum and data_shifted is zero.
EnergyBreakdown continuum_energy(const Density& density, const SmoothMap& map, double kappa,
                                 const QuadratureGrid& grid);

// ---------------------------------------------------------------------------
// Grid maps

/// Values of T at the midpoint nodes of a QuadratureGrid.
struct GridMap {
  QuadratureGrid grid;
  Matrix values;  // G x m

  GridMap(QuadratureGrid g, Matrix v);
  static GridMap sample(const SmoothMap& map, QuadratureGrid grid);

  std::size_t size() const { return grid.size(); }
  std::size_t output_dim() const { return static_cast<std::size_t>(values.cols()); }
};

/// Density values at the grid nodes.
std::vector<double> node_density(const Density& density, const QuadratureGrid& grid);

/// rho-weighted mean of the node values.
Vector weighted_mean(const GridMap& map, const std::vector<double>& rho);

/// rho-weighted RMS distance of the node values from their weighted mean.
double weighted_rms_spread(const GridMap& map, const std::vector<double>& rho);

/// Limiting energy of a grid map; node gradients by central differences with
/// second-order one-sided stencils on the boundary layer of nodes.
EnergyBreakdown continuum_energy(const Density& density, const GridMap& map, double kappa);

/// Discretized energy used for descent and its gradient.
///
/// The Dirichlet term sums squared face differences weighted by
/// rho^(1-2/d) at face midpoints; boundary faces carry zero flux, which is
/// the reflected-ghost Neumann condition. The repulsion is the node double
/// sum with quadrature weights. `gradient` is dE/dT divided by the cell
/// volume, so it approximates the L2 gradient.
struct GridObjective {
  double dirichlet = 0.0;
  double repulse = 0.0;
  double total() const { return dirichlet + repulse; }
  Matrix gradient;
};

enum class ResidualForm {
  /// c div(w grad T_l) + 2 rho(x) N_l(x) / Z: the first variation of the
  /// energy, equal to -1/2 the L2 gradient of gridmap_objective.
  variational,
  /// c div(w grad T_l) + 4 N_l(x) / Z, with the nonlocal term as commonly
  /// displayed for this equation.
  displayed,
};

std::string to_string(ResidualForm form);
ResidualForm residual_form_from_string(const std::string& s);

/// Node densities, face weights and stiffness of one grid, cached for
/// repeated evaluation during descent.
class GridEnergy {
 public:
  GridEnergy(const Density& density, const QuadratureGrid& grid, double kappa);

  GridObjective evaluate(const Matrix& values, bool with_gradient) const;
  Matrix residual(const Matrix& values, ResidualForm form) const;

  /// Bound on the largest eigenvalue of the Dirichlet part of the L2
  /// Hessian, 2 c sup w sum_k 4 / dx_k^2; sets the explicit step scale.
  double stiffness() const { return stiffness_; }
  const std::vector<double>& rho() const { return rho_; }
  const QuadratureGrid& grid() const { return *grid_; }

 private:
  /// c * div(w grad T) per node and output.
  Matrix divergence(const Matrix& values) const;
  /// Z and N (G x m), see el_residual.
  double nonlocal(const Matrix& values, Matrix* n) const;

  const QuadratureGrid* grid_;
  double c_;
  std::vector<double> rho_;
  std::vector<std::vector<double>> face_w_;  // per axis, face between a and a + stride
  std::vector<std::size_t> stride_;
  double stiffness_ = 0.0;
};

GridObjective gridmap_objective(const Density& density, const GridMap& map, double kappa,
                                bool with_gradient);

/// Euler-Lagrange residual per node and output. N_l(x) = int (T_l(x) -
/// T_l(x')) (1 + |dT|^2)^-2 rho(x') dx', Z = int int (1 + |dT|^2)^-1 rho rho.
Matrix el_residual(const GridMap& map, const Density& density, double kappa,
                   ResidualForm form = ResidualForm::variational);

/// max |grad T_l . nu| over boundary faces, using the reflected ghost node
/// that closes the divergence stencil.
double boundary_flux(const GridMap& map);

}  // namespace tsnelab

#endif  // TSNELAB_CONTINUUM_HPP
