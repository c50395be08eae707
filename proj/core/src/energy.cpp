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


#include "tsnelab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsnelab {

std::string to_string(Variant v) { return v == Variant::rescaled ? "rescaled" : "classic"; }

Variant variant_from_string(const std::string& s) {
  if (s == "classic") return Variant::classic;
  if (s == "rescaled") return Variant::rescaled;
  throw std::invalid_argument("unknown variant '" + s + "'");
}

namespace {

void check_profile(const Dataset& data, const BandwidthProfile& profile) {
  if (data.size() < 2) throw std::invalid_argument("affinities: need at least two points");
  if (profile.size() != data.size())
    throw std::invalid_argument("affinities: profile size does not match dataset");
  for (double s : profile.sigmas)
    if (!(s > 0.0) || !std::isfinite(s))
      throw std::invalid_argument("affinities: bandwidths must be positive and finite");
}

void check_embedding(const Matrix& y, std::size_t n) {
  if (static_cast<std::size_t>(y.rows()) != n)
    throw std::invalid_argument("embedding size does not match dataset");
  if (!y.allFinite()) throw std::invalid_argument("embedding has non-finite coordinates");
}

double kernel_sum(const Matrix& y) {
  const std::size_t n = static_cast<std::size_t>(y.rows()), m = static_cast<std::size_t>(y.cols());
  const double* base = y.data();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      s += 1.0 / (1.0 + squared_distance(base + i * m, base + j * m, m));
  return 2.0 * s;
}

double repulsion_from_sum(double s, std::size_t n, RepulsionSum repulsion) {
  const double nn = static_cast<double>(n);
  if (repulsion == RepulsionSum::inclusive) s += nn;
  return std::log(s) - 2.0 * std::log(nn);
}

}  // namespace

// ---------------------------------------------------------------------------

ConditionalAffinities::ConditionalAffinities(const Dataset& data, const BandwidthProfile& profile,
                                             bool use_neighbor_grid)
    : data_(&data), n_(data.size()), d_(data.dim()) {
  check_profile(data, profile);
  inv2s2_.resize(n_);
  umin_.resize(n_);
  logz_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) inv2s2_[i] = 1.0 / (2.0 * profile.sigmas[i] * profile.sigmas[i]);
  const double* base = data.points.data();

  if (!use_neighbor_grid) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double* xi = base + i * d_;
      double umin = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n_; ++k)
        if (k != i) umin = std::min(umin, squared_distance(xi, base + k * d_, d_) * inv2s2_[i]);
      double s = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        if (k == i) continue;
        const double u = squared_distance(xi, base + k * d_, d_) * inv2s2_[i] - umin;
        if (u <= kNegligibleExponent) s += std::exp(-u);
      }
      umin_[i] = umin;
      logz_[i] = std::log(s);
    }
    return;
  }

  std::vector<double> sorted(profile.sigmas);
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n_ / 2), sorted.end());
  grid_ = std::make_unique<NeighborGrid>(data.points, 8.0 * sorted[n_ / 2]);
  radius_.resize(n_);
  std::vector<Neighbor> nbrs;
  for (std::size_t i = 0; i < n_; ++i) {
    const auto xi = data.point(i);
    const double sigma = profile.sigmas[i];
    double r = 2.0 * sigma;
    nbrs.clear();
    grid_->query(xi, r, i, nbrs);
    while (nbrs.empty()) {
      r *= 2.0;
      grid_->query(xi, r, i, nbrs);
    }
    double rmin2 = std::numeric_limits<double>::infinity();
    for (const auto& nb : nbrs) rmin2 = std::min(rmin2, nb.dist2);
    radius_[i] = std::sqrt(rmin2 + 2.0 * kNegligibleExponent * sigma * sigma) * (1.0 + 1e-9);
    nbrs.clear();
    grid_->query(xi, radius_[i], i, nbrs);
    std::sort(nbrs.begin(), nbrs.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    const double umin = rmin2 * inv2s2_[i];
    double s = 0.0;
    for (const auto& nb : nbrs) {
      const double u = nb.dist2 * inv2s2_[i] - umin;
      if (u <= kNegligibleExponent) s += std::exp(-u);
    }
    umin_[i] = umin;
    logz_[i] = std::log(s);
  }
}

double ConditionalAffinities::conditional(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  const double r2 = squared_distance(data_->points.data() + i * d_, data_->points.data() + j * d_, d_);
  return std::exp(-(r2 * inv2s2_[i] - umin_[i]) - logz_[i]);
}

PairAffinities PairAffinities::build(const ConditionalAffinities& cond) {
  const std::size_t n = cond.size();
  // Row conditionals in CSR form, then w = C + C^T restricted to j > i.
  std::vector<std::size_t> c_start(n + 1, 0);
  std::vector<std::uint32_t> c_cols;
  std::vector<double> c_vals;
  for (std::size_t i = 0; i < n; ++i) {
    cond.for_each_in_row(i, [&](std::size_t j, double p, double) {
      if (p == 0.0) return;
      c_cols.push_back(static_cast<std::uint32_t>(j));
      c_vals.push_back(p);
    });
    c_start[i + 1] = c_cols.size();
  }
  std::vector<std::size_t> t_start(n + 1, 0);
  for (auto j : c_cols) ++t_start[j + 1];
  for (std::size_t i = 0; i < n; ++i) t_start[i + 1] += t_start[i];
  std::vector<std::uint32_t> t_cols(c_cols.size());
  std::vector<double> t_vals(c_vals.size());
  {
    std::vector<std::size_t> fill(t_start.begin(), t_start.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = c_start[i]; p < c_start[i + 1]; ++p) {
        const std::size_t dst = fill[c_cols[p]]++;
        t_cols[dst] = static_cast<std::uint32_t>(i);
        t_vals[dst] = c_vals[p];
      }
  }

  PairAffinities out;
  out.n = n;
  out.row_start.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a = c_start[i], b = t_start[i];
    const std::size_t ae = c_start[i + 1], be = t_start[i + 1];
    while (a < ae && c_cols[a] <= i) ++a;
    while (b < be && t_cols[b] <= i) ++b;
    while (a < ae || b < be) {
      const std::uint32_t ja = a < ae ? c_cols[a] : std::numeric_limits<std::uint32_t>::max();
      const std::uint32_t jb = b < be ? t_cols[b] : std::numeric_limits<std::uint32_t>::max();
      const std::uint32_t j = std::min(ja, jb);
      double w = 0.0;
      if (ja == j) w += c_vals[a++];
      if (jb == j) w += t_vals[b++];
      out.cols.push_back(j);
      out.weights.push_back(w);
    }
    out.row_start[i + 1] = out.cols.size();
  }
  return out;
}

// ---------------------------------------------------------------------------

DiscreteEnergy::DiscreteEnergy(PairAffinities pairs, double h, RepulsionSum repulsion)
    : pairs_(std::move(pairs)), h_(h), repulsion_(repulsion) {
  if (!(h > 0.0)) throw std::invalid_argument("DiscreteEnergy: h must be positive");
}

DiscreteEnergy::DiscreteEnergy(const Dataset& data, const BandwidthProfile& profile,
                               const EnergyOptions& options)
    : DiscreteEnergy(
          PairAffinities::build(ConditionalAffinities(data, profile, options.use_neighbor_grid)),
          profile.h, options.repulsion) {}

namespace {

// Fused pass over all pairs i < j. M > 0 fixes the embedding dimension at
// compile time; M == 0 reads it from y.
template <int M>
void pair_pass(const PairAffinities& pairs, const Matrix& y, bool energies, bool gradients,
               double& s_out, double& a_out, Matrix& ga, Matrix& gr) {
  const std::size_t n = pairs.n;
  const std::size_t m = M > 0 ? static_cast<std::size_t>(M) : static_cast<std::size_t>(y.cols());
  const double* Y = y.data();
  double* GA = gradients ? ga.data() : nullptr;
  double* GR = gradients ? gr.data() : nullptr;
  double s = 0.0, a = 0.0;
  double diff[M > 0 ? M : 16];
  std::vector<double> diff_dyn(M > 0 ? 0 : m);
  double* df = (M > 0 || m <= 16) ? diff : diff_dyn.data();

  double acc_r[M > 0 ? M : 16], acc_a[M > 0 ? M : 16];
  std::vector<double> acc_dyn(M > 0 || m <= 16 ? 0 : 2 * m);
  double* ar = (M > 0 || m <= 16) ? acc_r : acc_dyn.data();
  double* aa = (M > 0 || m <= 16) ? acc_a : acc_dyn.data() + m;

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t ptr = pairs.row_start[i];
    const std::size_t end = pairs.row_start[i + 1];
    std::size_t next = ptr < end ? pairs.cols[ptr] : n;
    const double* yi = Y + i * m;
    // Row i accumulates locally so the compiler need not assume it aliases row j.
    for (std::size_t k = 0; k < m; ++k) ar[k] = aa[k] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* yj = Y + j * m;
      double d2 = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        df[k] = yi[k] - yj[k];
        d2 += df[k] * df[k];
      }
      const double q = 1.0 / (1.0 + d2);
      s += q;
      if (gradients) {
        const double qq = q * q;
        double* gj = GR + j * m;
        for (std::size_t k = 0; k < m; ++k) {
          ar[k] += qq * df[k];
          gj[k] -= qq * df[k];
        }
      }
      if (j == next) {
        const double w = pairs.weights[ptr];
        if (energies) a += w * std::log1p(d2);
        if (gradients) {
          const double wq = w * q;
          double* gj = GA + j * m;
          for (std::size_t k = 0; k < m; ++k) {
            aa[k] += wq * df[k];
            gj[k] -= wq * df[k];
          }
        }
        ++ptr;
        next = ptr < end ? pairs.cols[ptr] : n;
      }
    }
    if (gradients)
      for (std::size_t k = 0; k < m; ++k) {
        GR[i * m + k] += ar[k];
        GA[i * m + k] += aa[k];
      }
  }
  s_out = 2.0 * s;
  a_out = a;
}

}  // namespace

DiscreteEvaluation DiscreteEnergy::evaluate(const Matrix& y, bool energies, bool gradients) const {
  const std::size_t n = pairs_.n;
  check_embedding(y, n);
  DiscreteEvaluation ev;
  if (gradients) {
    ev.grad_attract = Matrix::Zero(y.rows(), y.cols());
    ev.grad_repulse = Matrix::Zero(y.rows(), y.cols());
  }
  double s = 0.0, a = 0.0;
  switch (y.cols()) {
    case 1: pair_pass<1>(pairs_, y, energies, gradients, s, a, ev.grad_attract, ev.grad_repulse); break;
    case 2: pair_pass<2>(pairs_, y, energies, gradients, s, a, ev.grad_attract, ev.grad_repulse); break;
    case 3: pair_pass<3>(pairs_, y, energies, gradients, s, a, ev.grad_attract, ev.grad_repulse); break;
    default: pair_pass<0>(pairs_, y, energies, gradients, s, a, ev.grad_attract, ev.grad_repulse);
  }
  const double nn = static_cast<double>(n);
  ev.kernel_sum = s;
  if (energies) {
    ev.attract = a / nn;
    ev.repulse = repulsion_from_sum(s, n, repulsion_);
  }
  if (gradients) {
    ev.grad_attract *= 2.0 / nn;
    const double s_eff = repulsion_ == RepulsionSum::inclusive ? s + nn : s;
    ev.grad_repulse *= -4.0 / s_eff;
  }
  return ev;
}

// ---------------------------------------------------------------------------

AffinityMatrix affinities_p(const Dataset& data, const BandwidthProfile& profile) {
  check_profile(data, profile);
  const std::size_t n = data.size(), d = data.dim();
  const double* base = data.points.data();
  AffinityMatrix out;
  out.conditionals = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 1.0 / (2.0 * profile.sigmas[i] * profile.sigmas[i]);
    double umin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      u[j] = squared_distance(base + i * d, base + j * d, d) * inv;
      umin = std::min(umin, u[j]);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) s += std::exp(-(u[j] - umin));
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) out.conditionals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(-(u[j] - umin)) / s;
  }
  out.p = (out.conditionals + out.conditionals.transpose()) / (2.0 * static_cast<double>(n));
  return out;
}

Matrix affinities_q(const Embedding& embedding) {
  const auto& y = embedding.y;
  const Eigen::Index n = y.rows();
  if (n < 2) throw std::invalid_argument("affinities_q: need at least two points");
  check_embedding(y, static_cast<std::size_t>(n));
  Matrix q = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) q(i, j) = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
  return q / q.sum();
}

double kl_energy(const AffinityMatrix& p, const Embedding& embedding) {
  if (p.p.rows() != embedding.y.rows())
    throw std::invalid_argument("kl_energy: size mismatch");
  const Matrix q = affinities_q(embedding);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.p.cols(); ++j) {
      if (i == j) continue;
      const double pij = p.p(i, j);
      if (pij > 0.0) kl += pij * std::log(pij / q(i, j));
    }
  return kl;
}

double attraction_energy(const ConditionalAffinities& cond, const Matrix& y) {
  const std::size_t n = cond.size(), m = static_cast<std::size_t>(y.cols());
  check_embedding(y, n);
  const double* Y = y.data();
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    cond.for_each_in_row(i, [&](std::size_t j, double p, double) {
      a += p * std::log1p(squared_distance(Y + i * m, Y + j * m, m));
    });
  return a / static_cast<double>(n);
}

double repulsion_energy(const Matrix& y, RepulsionSum repulsion) {
  const std::size_t n = static_cast<std::size_t>(y.rows());
  if (n < 2) throw std::invalid_argument("repulsion_energy: need at least two points");
  check_embedding(y, n);
  return repulsion_from_sum(kernel_sum(y), n, repulsion);
}

EnergyBreakdown decompose(const Dataset& data, const BandwidthProfile& profile,
                          const Embedding& embedding, const EnergyOptions& options) {
  const ConditionalAffinities cond(data, profile, options.use_neighbor_grid);
  const std::size_t n = data.size(), m = embedding.dim();
  check_embedding(embedding.y, n);
  const double* Y = embedding.y.data();
  const double nn = static_cast<double>(n);
  const double s = kernel_sum(embedding.y);
  const double log_s = std::log(s);

  EnergyBreakdown out;
  double a = 0.0, data_term = 0.0, kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cond.for_each_in_row(i, [&](std::size_t j, double p_ji, double r2) {
      const double l = std::log1p(squared_distance(Y + i * m, Y + j * m, m));
      a += p_ji * l;
      // Each unordered pair is visited once: from the lower index, or from
      // the higher index when the lower row does not list it.
      if (j < i && cond.listed(j, r2)) return;
      const double pij = (p_ji + cond.conditional(j, i)) / (2.0 * nn);
      if (pij <= 0.0) return;
      const double lp = std::log(pij);
      data_term += 2.0 * pij * lp;
      kl += 2.0 * pij * (lp + l + log_s);
    });
  }
  out.attract = a / nn;
  out.repulse = repulsion_from_sum(s, n, options.repulsion);
  out.data_shifted = data_term + 2.0 * std::log(nn);
  out.total_kl = kl;
  out.rescaled_total = out.attract / (profile.h * profile.h) + out.repulse;
  return out;
}

double rescaled_energy(const Dataset& data, const BandwidthProfile& profile,
                       const Embedding& embedding, const EnergyOptions& options) {
  const ConditionalAffinities cond(data, profile, options.use_neighbor_grid);
  return attraction_energy(cond, embedding.y) / (profile.h * profile.h) +
         repulsion_energy(embedding.y, options.repulsion);
}

Matrix grad_discrete(const Dataset& data, const BandwidthProfile& profile,
                     const Embedding& embedding, Variant variant, const EnergyOptions& options) {
  const DiscreteEnergy energy(data, profile, options);
  auto ev = energy.evaluate(embedding.y, false, true);
  return energy.attraction_weight(variant) * ev.grad_attract + ev.grad_repulse;
}

}  // namespace tsnelab
