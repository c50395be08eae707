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

#include "tsnelab/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsnelab {

namespace {
constexpr std::size_t kMaxGridDim = 3;
}

NeighborGrid::NeighborGrid(const Matrix& points, double cell_size)
    : points_(&points),
      n_(static_cast<std::size_t>(points.rows())),
      d_(static_cast<std::size_t>(points.cols())),
      cell_(cell_size) {
  if (n_ > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("NeighborGrid: too many points");
  origin_.assign(d_, 0.0);
  counts_.assign(d_, 1);
  std::vector<double> hi(d_, 0.0);
  for (std::size_t k = 0; k < d_; ++k) {
    origin_[k] = n_ ? points.col(static_cast<Eigen::Index>(k)).minCoeff() : 0.0;
    hi[k] = n_ ? points.col(static_cast<Eigen::Index>(k)).maxCoeff() : 0.0;
  }
  // Higher dimensions fall back to a single cell, i.e. a linear scan.
  if (d_ <= kMaxGridDim && cell_ > 0.0 && std::isfinite(cell_)) {
    // Keep the cell count within a small multiple of n.
    auto total = [&] {
      double c = 1.0;
      for (std::size_t k = 0; k < d_; ++k) c *= std::floor((hi[k] - origin_[k]) / cell_) + 1.0;
      return c;
    };
    while (total() > 4.0 * static_cast<double>(n_) + 64.0) cell_ *= 1.5;
    for (std::size_t k = 0; k < d_; ++k)
      counts_[k] = static_cast<std::size_t>(std::floor((hi[k] - origin_[k]) / cell_)) + 1;
  } else {
    cell_ = std::numeric_limits<double>::infinity();
  }

  std::size_t cells = 1;
  for (auto c : counts_) cells *= c;
  std::vector<std::size_t> cell_of(n_);
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < d_; ++k) {
      std::size_t c = 0;
      if (counts_[k] > 1) {
        const double t = (points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) - origin_[k]) / cell_;
        c = std::min(static_cast<std::size_t>(t), counts_[k] - 1);
      }
      idx = idx * counts_[k] + c;
    }
    cell_of[i] = idx;
    ++cell_start_[idx + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  order_.resize(n_);
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < n_; ++i) order_[fill[cell_of[i]]++] = static_cast<std::uint32_t>(i);
}

void NeighborGrid::query(std::span<const double> x, double radius, std::size_t skip,
                         std::vector<Neighbor>& out) const {
  const double r2 = radius * radius;
  const double* base = points_->data();
  std::vector<std::size_t> lo(d_), hi(d_), idx(d_);
  for (std::size_t k = 0; k < d_; ++k) {
    if (counts_[k] == 1) {
      lo[k] = hi[k] = 0;
      continue;
    }
    const double a = std::floor((x[k] - radius - origin_[k]) / cell_);
    const double b = std::floor((x[k] + radius - origin_[k]) / cell_);
    const double top = static_cast<double>(counts_[k] - 1);
    lo[k] = static_cast<std::size_t>(std::clamp(a, 0.0, top));
    hi[k] = static_cast<std::size_t>(std::clamp(b, 0.0, top));
  }
  idx = lo;
  while (true) {
    std::size_t cell = 0;
    for (std::size_t k = 0; k < d_; ++k) cell = cell * counts_[k] + idx[k];
    for (std::size_t p = cell_start_[cell]; p < cell_start_[cell + 1]; ++p) {
      const std::uint32_t j = order_[p];
      if (j == skip) continue;
      const double s = squared_distance(x.data(), base + static_cast<std::size_t>(j) * d_, d_);
      if (s <= r2) out.push_back({s, j});
    }
    std::size_t k = d_;
    while (k-- > 0) {
      if (idx[k]++ < hi[k]) break;
      idx[k] = lo[k];
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
}

void NeighborGrid::query_sorted(std::span<const double> x, double radius, std::size_t skip,
                                std::vector<Neighbor>& out) const {
  const auto start = out.size();
  query(x, radius, skip, out);
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(start), out.end(),
            [](const Neighbor& a, const Neighbor& b) {
              return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
            });
}

}  // namespace tsnelab
