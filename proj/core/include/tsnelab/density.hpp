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

#ifndef TSNELAB_DENSITY_HPP
#define TSNELAB_DENSITY_HPP

#include "tsnelab/common.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace tsnelab {

/// Axis-aligned box [lower, upper] in R^d.
class Domain {
 public:
  Domain(std::vector<double> lower, std::vector<double> upper);

  /// The unit cube [0,1]^d.
  static Domain unit(std::size_t d);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double extent(std::size_t k) const { return upper_[k] - lower_[k]; }
  double volume() const;
  double diameter() const;

  bool contains(std::span<const double> x) const;
  /// Euclidean distance from an interior point to the boundary.
  double distance_to_boundary(std::span<const double> x) const;

  bool operator==(const Domain&) const = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

enum class DensityKind { uniform, gaussian_mixture, tiles };

/// One component of a truncated Gaussian mixture; `scale` holds per-axis
/// standard deviations.
struct GaussianComponent {
  std::vector<double> mean;
  std::vector<double> scale;
  double weight = 1.0;
};

/// Lower and upper bounds of a density on its domain.
struct DensityBounds {
  double lower;
  double upper;
};

/// Analytic probability density on a box, bounded above and below.
///
/// Mixture components are truncated to the box and renormalized one by one,
/// so the mixture integrates to exactly one. Tile values are rescaled by their
/// total mass. Every constructor verifies unit mass by composite Gauss-Legendre
/// quadrature and throws std::invalid_argument when the check fails.
class Density {
 public:
  static Density uniform(Domain domain);
  static Density gaussian_mixture(Domain domain, std::vector<GaussianComponent> components);
  /// Piecewise constant on a regular grid of `shape` tiles, row-major values
  /// with the last axis fastest.
  static Density tiles(Domain domain, std::vector<std::size_t> shape, std::vector<double> values);

  static Density from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  DensityKind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }
  std::size_t dim() const { return domain_.dim(); }

  /// rho(x); throws DomainError for x outside the domain.
  double operator()(std::span<const double> x) const;
  /// rho(x) without the containment check.
  double eval_unchecked(std::span<const double> x) const;

  /// (inf rho, sup rho) from the analytic form. Exact for uniform, tiles and
  /// single-component mixtures; for several components the sum of component
  /// bounds, which still brackets rho.
  DensityBounds bounds() const { return bounds_; }

  /// Mass of the unnormalized descriptor before rescaling (1 for uniform
  /// descriptors given in normalized form).
  double normalization() const { return normalization_; }

  /// Integral of rho over the domain by tensor Gauss-Legendre quadrature.
  double quadrature_mass() const;

  /// Integral of rho over the slab lower[axis]+[a,b] (all other axes full).
  double slab_mass(std::size_t axis, double a, double b) const;

  const std::vector<GaussianComponent>& components() const { return components_; }
  const std::vector<std::size_t>& tile_shape() const { return tile_shape_; }
  const std::vector<double>& tile_values() const { return tile_values_; }
  /// Tile index containing x (tiles kind only).
  std::size_t tile_index(std::span<const double> x) const;

 private:
  Density(Domain domain, DensityKind kind);
  void finalize();
  double integrate(std::span<const double> lo, std::span<const double> hi) const;

  Domain domain_;
  DensityKind kind_;
  std::vector<GaussianComponent> components_;
  std::vector<double> component_coef_;  // weight / (normal constant * box mass)
  std::vector<std::size_t> tile_shape_;
  std::vector<double> tile_values_;
  double uniform_value_ = 0.0;
  double normalization_ = 1.0;
  DensityBounds bounds_{0.0, 0.0};
};

/// n i.i.d. draws from a density.
struct Dataset {
  Matrix points;
  std::uint64_t seed = 0;
  std::shared_ptr<const Density> density;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
  std::span<const double> point(std::size_t i) const { return row_span(points, i); }
};

/// Wraps explicit points, e.g. hand-built test configurations.
Dataset make_dataset(Matrix points);

/// Rejection sampling against the uniform law on the domain with envelope
/// sup rho. Bit-identical for a fixed seed.
Dataset sample(const Density& density, std::size_t n, std::uint64_t seed);

}  // namespace tsnelab

#endif  // TSNELAB_DENSITY_HPP
