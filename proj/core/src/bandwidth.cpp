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

#include "tsnelab/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsnelab {

std::string to_string(ProfileMode mode) {
  return mode == ProfileMode::analytic ? "analytic" : "calibrated";
}

ProfileMode profile_mode_from_string(const std::string& s) {
  if (s == "analytic") return ProfileMode::analytic;
  if (s == "calibrated") return ProfileMode::calibrated;
  throw std::invalid_argument("unknown profile mode '" + s + "'");
}

BandwidthProfile uniform_profile(std::size_t n, double sigma, double h) {
  return {std::vector<double>(n, sigma), h, 1.0, ProfileMode::calibrated};
}

double PerplexityTarget::resolve(std::size_t n, std::size_t d, double h) const {
  if (convention == TargetConvention::raw) return value;
  return value * static_cast<double>(n) * std::pow(h, static_cast<double>(d));
}

namespace {

void check_perplexity_args(const Dataset& data, std::size_t i, double sigma) {
  if (data.size() < 2) throw std::invalid_argument("perplexity: need at least two points");
  if (i >= data.size()) throw std::out_of_range("perplexity: index out of range");
  if (!(sigma > 0.0)) throw std::invalid_argument("perplexity: sigma must be positive");
}

}  // namespace

double perplexity(const Dataset& data, std::size_t i, double sigma) {
  check_perplexity_args(data, i, sigma);
  const std::size_t n = data.size(), d = data.dim();
  const double* xi = data.points.data() + i * d;
  const double inv = 1.0 / (2.0 * sigma * sigma);

  double umin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i) continue;
    umin = std::min(umin, squared_distance(xi, data.points.data() + k * d, d) * inv);
  }
  double sum = 0.0, moment = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == i) continue;
    const double u = squared_distance(xi, data.points.data() + k * d, d) * inv - umin;
    const double w = std::exp(-u);
    sum += w;
    moment += u * w;
  }
  return std::exp(std::log(sum) + moment / sum);
}

// ---------------------------------------------------------------------------

LocalPerplexity::LocalPerplexity(const Dataset& data, const NeighborGrid& grid, std::size_t i)
    : data_(&data), grid_(&grid), i_(i) {
  check_perplexity_args(data, i, 1.0);
}

void LocalPerplexity::ensure_radius(double sigma) {
  if (complete_) return;
  const auto xi = data_->point(i_);
  const std::size_t others = data_->size() - 1;
  std::vector<Neighbor> found;
  auto fetch = [&](double r) {
    found.clear();
    radius_ = r;
    grid_->query(xi, r, i_, found);
    complete_ = found.size() == others;
  };
  const bool fresh = d2_.empty();
  if (fresh) {
    double r = 1.5 * std::sqrt(2.0 * kNegligibleExponent) * sigma;
    fetch(r);
    while (found.empty()) fetch(2.0 * radius_);
  } else {
    const double need = std::sqrt(d2_.front() + 2.0 * kNegligibleExponent * sigma * sigma);
    if (need <= radius_) return;
    fetch(std::max(need, 2.0 * radius_));
  }
  d2_.resize(found.size());
  for (std::size_t k = 0; k < found.size(); ++k) d2_[k] = found[k].dist2;
  // Nearest first: the running weight sum then starts at exactly 1 and no
  // dropped term can change it. The first moment loses at most 38 exp(-38)
  // per dropped term.
  std::iter_swap(d2_.begin(), std::min_element(d2_.begin(), d2_.end()));
  cuts_.clear();
  if (fresh) ensure_radius(sigma);
}

std::size_t LocalPerplexity::prefix(double sigma) {
  const double bound = d2_.front() + 2.0 * kNegligibleExponent * sigma * sigma;
  std::size_t lo = 1, hi = d2_.size();
  for (const auto& [b, end] : cuts_) {
    if (b == bound) return end;
    if (b < bound) lo = std::max(lo, end);
    else hi = std::min(hi, end);
  }
  const auto mid = std::partition(d2_.begin() + static_cast<std::ptrdiff_t>(lo),
                                  d2_.begin() + static_cast<std::ptrdiff_t>(hi),
                                  [bound](double v) { return v <= bound; });
  const auto end = static_cast<std::size_t>(mid - d2_.begin());
  cuts_.emplace_back(bound, end);
  return end;
}

double LocalPerplexity::operator()(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("perplexity: sigma must be positive");
  ensure_radius(sigma);
  const std::size_t count = prefix(sigma);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const double umin = d2_.front() * inv;
  double sum = 0.0, moment = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double u = d2_[k] * inv - umin;
    if (u > kNegligibleExponent) continue;
    const double w = std::exp(-u);
    sum += w;
    moment += u * w;
  }
  return std::exp(std::log(sum) + moment / sum);
}

// ---------------------------------------------------------------------------

double solve_bandwidth(const Dataset& data, std::size_t i, const PerplexityTarget& target,
                       double h, double tol, const SolveOptions& options) {
  if (data.size() < 2) throw std::invalid_argument("solve_bandwidth: need at least two points");
  const double raw = target.resolve(data.size(), data.dim(), h);
  return solve_bandwidth_with([&](double s) { return perplexity(data, i, s); }, data.size(), raw,
                              h, tol, options);
}

double kde(const Dataset& data, double h, std::span<const double> x) {
  if (!(h > 0.0)) throw std::invalid_argument("kde: h must be positive");
  const std::size_t n = data.size(), d = data.dim();
  if (x.size() != d) throw std::invalid_argument("kde: dimension mismatch");
  const double inv = 1.0 / (2.0 * h * h);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += std::exp(-squared_distance(x.data(), data.points.data() + i * d, d) * inv);
  const double dd = static_cast<double>(d);
  return s / (static_cast<double>(n) * std::pow(h, dd) * std::pow(2.0 * std::numbers::pi, 0.5 * dd));
}

double limit_bandwidth(const Density& density, double kappa, std::span<const double> x) {
  if (!(kappa > 0.0)) throw std::invalid_argument("limit_bandwidth: kappa must be positive");
  const double rho = density(x);
  return std::pow(kappa / rho, 1.0 / static_cast<double>(density.dim())) / std::sqrt(kTwoPiE);
}

BandwidthProfile calibrate_profile(const Dataset& data, double kappa, double h, double tol) {
  const std::size_t n = data.size(), d = data.dim();
  if (n < 2) throw std::invalid_argument("calibrate_profile: need at least two points");
  if (!(kappa > 0.0) || !(h > 0.0))
    throw std::invalid_argument("calibrate_profile: kappa and h must be positive");
  const double target = PerplexityTarget{kappa, TargetConvention::scaled}.resolve(n, d, h);

  BandwidthProfile profile;
  profile.h = h;
  profile.kappa = kappa;
  profile.mode = ProfileMode::calibrated;
  profile.sigmas.resize(n);

  const NeighborGrid grid(data.points, h);
  for (std::size_t i = 0; i < n; ++i) {
    LocalPerplexity pp(data, grid, i);
    try {
      profile.sigmas[i] = solve_bandwidth_with(pp, n, target, h, tol);
    } catch (const UnachievableTarget& e) {
      throw UnachievableTarget("point " + std::to_string(i) + ": " + e.what(), e.feasible_lo,
                               e.feasible_hi);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("point " + std::to_string(i) + ": " + e.what(), e.residual);
    }
  }
  return profile;
}

BandwidthProfile analytic_profile(const Dataset& data, const Density& density, double kappa,
                                  double h) {
  if (!(h > 0.0)) throw std::invalid_argument("analytic_profile: h must be positive");
  BandwidthProfile profile;
  profile.h = h;
  profile.kappa = kappa;
  profile.mode = ProfileMode::analytic;
  profile.sigmas.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    profile.sigmas[i] = h * limit_bandwidth(density, kappa, data.point(i));
  return profile;
}

}  // namespace tsnelab
