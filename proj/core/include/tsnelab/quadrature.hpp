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

#ifndef TSNELAB_QUADRATURE_HPP
#define TSNELAB_QUADRATURE_HPP

#include "tsnelab/density.hpp"

#include <span>
#include <vector>

namespace tsnelab {

/// Tensor grid of cell midpoints over a box with equal product weights.
class QuadratureGrid {
 public:
  QuadratureGrid(Domain domain, std::vector<std::size_t> counts);

  /// Default resolution: 128 nodes for d = 1, 64 per axis for d = 2, 24 otherwise.
  static QuadratureGrid standard(const Domain& domain);

  const Domain& domain() const { return domain_; }
  std::size_t dim() const { return domain_.dim(); }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t size() const { return static_cast<std::size_t>(nodes_.rows()); }
  double spacing(std::size_t k) const { return spacing_[k]; }
  /// Weight of every node (cell volume).
  double weight() const { return weight_; }
  std::span<const double> node(std::size_t i) const { return row_span(nodes_, i); }
  const Matrix& nodes() const { return nodes_; }

  /// Flat index of a multi-index (last axis fastest).
  std::size_t flat(std::span<const std::size_t> idx) const;

 private:
  Domain domain_;
  std::vector<std::size_t> counts_;
  std::vector<double> spacing_;
  double weight_;
  Matrix nodes_;
};

}  // namespace tsnelab

#endif  // TSNELAB_QUADRATURE_HPP
