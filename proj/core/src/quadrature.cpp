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


#include "tsnelab/quadrature.hpp"

#include <stdexcept>

namespace tsnelab {

QuadratureGrid::QuadratureGrid(Domain domain, std::vector<std::size_t> counts)
    : domain_(std::move(domain)), counts_(std::move(counts)) {
  const std::size_t d = domain_.dim();
  if (counts_.size() == 1 && d > 1) counts_.assign(d, counts_[0]);
  if (counts_.size() != d) throw std::invalid_argument("QuadratureGrid: one count per axis");
  std::size_t total = 1;
  weight_ = 1.0;
  spacing_.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    if (counts_[k] == 0) throw std::invalid_argument("QuadratureGrid: counts must be positive");
    total *= counts_[k];
    spacing_[k] = domain_.extent(k) / static_cast<double>(counts_[k]);
    weight_ *= spacing_[k];
  }
  nodes_.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t k = 0; k < d; ++k)
      nodes_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          domain_.lower()[k] + (static_cast<double>(idx[k]) + 0.5) * spacing_[k];
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < counts_[k]) break;
      idx[k] = 0;
    }
  }
}

QuadratureGrid QuadratureGrid::standard(const Domain& domain) {
  const std::size_t d = domain.dim();
  const std::size_t per_axis = d == 1 ? 128 : d == 2 ? 64 : 24;
  return QuadratureGrid(domain, std::vector<std::size_t>(d, per_axis));
}

std::size_t QuadratureGrid::flat(std::span<const std::size_t> idx) const {
  std::size_t f = 0;
  for (std::size_t k = 0; k < counts_.size(); ++k) f = f * counts_[k] + idx[k];
  return f;
}

}  // namespace tsnelab
