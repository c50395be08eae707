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

#ifndef TSNELAB_ENERGY_HPP
#define TSNELAB_ENERGY_HPP

#include "tsnelab/bandwidth.hpp"
#include "tsnelab/density.hpp"
#include "tsnelab/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tsnelab {

enum class Variant { classic, rescaled };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Diagonal convention of the repulsion normalizer. `exclusive` sums k != l,
/// which makes KL = D + A + R exact; `inclusive` sums every (k, l) pair and
/// adds n to the sum.
enum class RepulsionSum { exclusive, inclusive };

struct EnergyOptions {
  RepulsionSum repulsion = RepulsionSum::exclusive;
  /// Find the listed neighbors of each point through a cell grid instead of a
  /// scan over all points. The listed sets and the results are the same.
  bool use_neighbor_grid = false;
};

enum class EmbeddingProvenance { explicit_points, map_applied };

struct Embedding {
  Matrix y;
  EmbeddingProvenance provenance = EmbeddingProvenance::explicit_points;

  std::size_t size() const { return static_cast<std::size_t>(y.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(y.cols()); }
};

/// Dense symmetric joint affinities p_ij and the row conditionals p_{j|i}.
struct AffinityMatrix {
  Matrix p;
  Matrix conditionals;
};

/// Attraction, repulsion and data terms of the discrete objective.
///
/// total_kl = data_shifted + attract + repulse holds exactly under the
/// exclusive repulsion convention. data_shifted carries the +2 log n shift.
struct EnergyBreakdown {
  double attract = 0.0;
  double repulse = 0.0;
  double data_shifted = 0.0;
  double total_kl = 0.0;
  std::optional<double> rescaled_total;
};

// ---------------------------------------------------------------------------

/// Row normalizers of the Gaussian conditionals p_{j|i}, computed once in log
/// space so rows can be streamed without storing an n x n matrix.
class ConditionalAffinities {
 public:
  ConditionalAffinities(const Dataset& data, const BandwidthProfile& profile,
                        bool use_neighbor_grid = false);

  std::size_t size() const { return n_; }

  /// p_{j|i}; zero on the diagonal.
  double conditional(std::size_t i, std::size_t j) const;

  /// Calls f(j, p_{j|i}, |X_i - X_j|^2) in increasing j for every j != i whose
  /// weight is not negligible (see kNegligibleExponent).
  template <class F>
  void for_each_in_row(std::size_t i, F&& f) const;

  /// True when for_each_in_row(i, ...) visits a point at squared distance dist2.
  bool listed(std::size_t i, double dist2) const {
    return dist2 * inv2s2_[i] - umin_[i] <= kNegligibleExponent;
  }

 private:
  const Dataset* data_;
  std::size_t n_, d_;
  std::vector<double> inv2s2_;  // 1 / (2 sigma_i^2)
  std::vector<double> umin_;    // min_k u_ik
  std::vector<double> logz_;    // log sum_k exp(-(u_ik - umin_i))
  std::unique_ptr<NeighborGrid> grid_;
  std::vector<double> radius_;
};

/// Symmetric pair weights w_ij = p_{j|i} + p_{i|j} for i < j in CSR form,
/// nonzero entries only; p_ij = w_ij / (2n).
struct PairAffinities {
  std::size_t n = 0;
  std::vector<std::size_t> row_start;
  std::vector<std::uint32_t> cols;
  std::vector<double> weights;

  static PairAffinities build(const ConditionalAffinities& cond);
  std::size_t nonzeros() const { return weights.size(); }
};

/// One evaluation of the attraction/repulsion objective and its gradients.
struct DiscreteEvaluation {
  double attract = 0.0;
  double repulse = 0.0;
  double kernel_sum = 0.0;  // S = sum_{k != l} (1 + |y_k - y_l|^2)^-1
  Matrix grad_attract;
  Matrix grad_repulse;
};

/// A_n and R_n with analytic gradients over a fixed set of pair weights.
class DiscreteEnergy {
 public:
  DiscreteEnergy(PairAffinities pairs, double h, RepulsionSum repulsion = RepulsionSum::exclusive);
  DiscreteEnergy(const Dataset& data, const BandwidthProfile& profile,
                 const EnergyOptions& options = {});

  /// Energies are computed when `energies` is set (log evaluations are the
  /// expensive part); gradients when `gradients` is set.
  DiscreteEvaluation evaluate(const Matrix& y, bool energies, bool gradients) const;

  /// Weight of the attraction term for a variant: 1 or 1/h^2.
  double attraction_weight(Variant v) const { return v == Variant::rescaled ? 1.0 / (h_ * h_) : 1.0; }
  double h() const { return h_; }
  std::size_t size() const { return pairs_.n; }
  const PairAffinities& pairs() const { return pairs_; }

 private:
  PairAffinities pairs_;
  double h_;
  RepulsionSum repulsion_;
};

// ---------------------------------------------------------------------------

/// Dense p_{j|i} and p_ij (small n).
AffinityMatrix affinities_p(const Dataset& data, const BandwidthProfile& profile);

/// Dense Student-t joint q_ij with zero diagonal.
Matrix affinities_q(const Embedding& embedding);

/// sum_{i != j} p_ij log(p_ij / q_ij) with 0 log 0 = 0.
double kl_energy(const AffinityMatrix& p, const Embedding& embedding);

/// A_n[T] = (1/n) sum_i sum_{j != i} p_{j|i} log(1 + |y_i - y_j|^2), streamed.
double attraction_energy(const ConditionalAffinities& cond, const Matrix& y);

/// log((1/n^2) S) (exclusive) or log((S + n) / n^2) (inclusive).
double repulsion_energy(const Matrix& y, RepulsionSum repulsion = RepulsionSum::exclusive);

/// Matrix-free decomposition; memory is O(n).
EnergyBreakdown decompose(const Dataset& data, const BandwidthProfile& profile,
                          const Embedding& embedding, const EnergyOptions& options = {});

/// A_n / h^2 + R_n.
double rescaled_energy(const Dataset& data, const BandwidthProfile& profile,
                       const Embedding& embedding, const EnergyOptions& options = {});

/// Gradient of A + R (classic) or A / h^2 + R (rescaled) with respect to y.
Matrix grad_discrete(const Dataset& data, const BandwidthProfile& profile,
                     const Embedding& embedding, Variant variant,
                     const EnergyOptions& options = {});

// ---------------------------------------------------------------------------

template <class F>
void ConditionalAffinities::for_each_in_row(std::size_t i, F&& f) const {
  const double* base = data_->points.data();
  const double* xi = base + i * d_;
  if (grid_) {
    thread_local std::vector<Neighbor> nbrs;
    nbrs.clear();
    grid_->query({xi, d_}, radius_[i], i, nbrs);
    std::sort(nbrs.begin(), nbrs.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    for (const auto& nb : nbrs) {
      const double u = nb.dist2 * inv2s2_[i];
      if (u - umin_[i] > kNegligibleExponent) continue;
      f(static_cast<std::size_t>(nb.index), std::exp(-(u - umin_[i]) - logz_[i]), nb.dist2);
    }
    return;
  }
  for (std::size_t j = 0; j < n_; ++j) {
    if (j == i) continue;
    const double r2 = squared_distance(xi, base + j * d_, d_);
    const double u = r2 * inv2s2_[i];
    if (u - umin_[i] > kNegligibleExponent) continue;
    f(j, std::exp(-(u - umin_[i]) - logz_[i]), r2);
  }
}

}  // namespace tsnelab

#endif  // TSNELAB_ENERGY_HPP
