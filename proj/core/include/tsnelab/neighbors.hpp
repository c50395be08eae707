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

#ifndef TSNELAB_NEIGHBORS_HPP
#define TSNELAB_NEIGHBORS_HPP

#include "tsnelab/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tsnelab {

struct Neighbor {
  double dist2;
  std::uint32_t index;
};

/// Uniform cell list over a point cloud for exact fixed-radius queries.
///
/// Kernel sums use it to visit only the points whose Gaussian weight is not
/// negligible.
class NeighborGrid {
 public:
  NeighborGrid(const Matrix& points, double cell_size);

  /// All points within `radius` of x (inclusive), excluding index `skip`.
  /// Appends to `out` in cell order, unsorted.
  void query(std::span<const double> x, double radius, std::size_t skip,
             std::vector<Neighbor>& out) const;

  /// Same as query() followed by sorting on distance.
  void query_sorted(std::span<const double> x, double radius, std::size_t skip,
                    std::vector<Neighbor>& out) const;

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

 private:
  const Matrix* points_;
  std::size_t n_;
  std::size_t d_;
  double cell_;
  std::vector<double> origin_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> cell_start_;
  std::vector<std::uint32_t> order_;
};

}  // namespace tsnelab

#endif  // TSNELAB_NEIGHBORS_HPP
