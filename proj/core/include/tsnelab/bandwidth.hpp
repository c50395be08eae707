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

#ifndef TSNELAB_BANDWIDTH_HPP
#define TSNELAB_BANDWIDTH_HPP

#include "tsnelab/density.hpp"
#include "tsnelab/neighbors.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tsnelab {

enum class ProfileMode { calibrated, analytic };

std::string to_string(ProfileMode mode);
ProfileMode profile_mode_from_string(const std::string& s);

/// Per-point bandwidths sigma_i = h * sigma_hat_i together with the scale h
/// and the perplexity parameter kappa they were produced for.
struct BandwidthProfile {
  std::vector<double> sigmas;
  double h = 1.0;
  double kappa = 1.0;
  ProfileMode mode = ProfileMode::calibrated;

  std::size_t size() const { return sigmas.size(); }
  /// sigma_hat_i = sigma_i / h.
  double normalized(std::size_t i) const { return sigmas[i] / h; }
};

/// Constant-bandwidth profile, handy for hand-built instances.
BandwidthProfile uniform_profile(std::size_t n, double sigma, double h = 1.0);

enum class TargetConvention { raw, scaled };

/// Perplexity target. `raw` asks for PP = value; `scaled` asks for
/// PP = value * n * h^d.
struct PerplexityTarget {
  double value;
  TargetConvention convention = TargetConvention::raw;

  double resolve(std::size_t n, std::size_t d, double h) const;
};

/// Perplexity of the conditional neighbor distribution of point i at
/// bandwidth sigma. The self term is excluded. Evaluated densely in log
/// space as log PP = log sum_k w_k + sum_k u_k w_k / sum_k w_k with
/// u_k = |X_i - X_k|^2 / (2 sigma^2) and w_k = exp(-u_k).
double perplexity(const Dataset& data, std::size_t i, double sigma);

/// Evaluates perplexity for one point over the neighbors that can change the
/// weight sum once the nearest one has been added. Neighbor lists are fetched
/// from a NeighborGrid, widened on demand and partitioned by radius so that
/// repeated evaluations at shrinking sigma touch fewer points.
class LocalPerplexity {
 public:
  LocalPerplexity(const Dataset& data, const NeighborGrid& grid, std::size_t i);
  double operator()(double sigma);
  std::size_t neighbor_count() const { return d2_.size(); }

 private:
  void ensure_radius(double sigma);
  std::size_t prefix(double sigma);

  const Dataset* data_;
  const NeighborGrid* grid_;
  std::size_t i_;
  double radius_ = 0.0;
  bool complete_ = false;
  std::vector<double> d2_;
  std::vector<std::pair<double, std::size_t>> cuts_;  // (squared radius, end)
};

struct SolveOptions {
  std::size_t max_bracket_steps = 200;
  std::size_t max_bisection_steps = 100;
};

/// Bandwidth of point i whose perplexity hits the target within tol * target.
/// The bracket grows geometrically (factor 2) from sigma = h, then bisects.
/// Throws UnachievableTarget unless 1 < target <= n - 1 and
/// ConvergenceError when bisection runs out of steps.
double solve_bandwidth(const Dataset& data, std::size_t i, const PerplexityTarget& target,
                       double h, double tol, const SolveOptions& options = {});

/// Same solver driven by an arbitrary perplexity evaluator.
template <class Eval>
double solve_bandwidth_with(Eval&& pp, std::size_t n, double target, double h, double tol,
                            const SolveOptions& options = {});

/// Fixed-bandwidth Gaussian kernel density estimate at x.
double kde(const Dataset& data, double h, std::span<const double> x);

/// Limiting normalized bandwidth sigma_kappa(x) = (kappa / rho(x))^(1/d) / sqrt(2 pi e).
double limit_bandwidth(const Density& density, double kappa, std::span<const double> x);

/// Calibrates every point against the scaled target kappa * n * h^d.
BandwidthProfile calibrate_profile(const Dataset& data, double kappa, double h, double tol);

/// sigma_i = h * sigma_kappa(X_i) from the analytic density.
BandwidthProfile analytic_profile(const Dataset& data, const Density& density, double kappa,
                                  double h);

// ---------------------------------------------------------------------------

template <class Eval>
double solve_bandwidth_with(Eval&& pp, std::size_t n, double target, double h, double tol,
                            const SolveOptions& options) {
  const double max_pp = static_cast<double>(n) - 1.0;
  if (!(target > 1.0 && target <= max_pp)) {
    throw UnachievableTarget("solve_bandwidth: perplexity target " + std::to_string(target) +
                                 " is unachievable; feasible range is (1, " +
                                 std::to_string(max_pp) + "]",
                             1.0, max_pp);
  }
  if (!(h > 0.0) || !(tol > 0.0))
    throw std::invalid_argument("solve_bandwidth: h and tol must be positive");

  const double slack = tol * target;
  double sigma = h;
  double value = pp(sigma);
  if (std::abs(value - target) <= slack) return sigma;

  double lo, hi;
  if (value < target) {
    lo = sigma;
    hi = 2.0 * sigma;
    for (std::size_t s = 0;; ++s) {
      value = pp(hi);
      if (std::abs(value - target) <= slack) return hi;
      if (value > target) break;
      if (s + 1 >= options.max_bracket_steps)
        throw ConvergenceError("solve_bandwidth: could not bracket target from above",
                               value - target);
      lo = hi;
      hi *= 2.0;
    }
  } else {
    hi = sigma;
    lo = 0.5 * sigma;
    for (std::size_t s = 0;; ++s) {
      value = pp(lo);
      if (std::abs(value - target) <= slack) return lo;
      if (value < target) break;
      if (s + 1 >= options.max_bracket_steps)
        throw ConvergenceError("solve_bandwidth: could not bracket target from below",
                               value - target);
      hi = lo;
      lo *= 0.5;
    }
  }

  double residual = value - target;
  for (std::size_t s = 0; s < options.max_bisection_steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    value = pp(mid);
    residual = value - target;
    if (std::abs(residual) <= slack) return mid;
    (residual < 0.0 ? lo : hi) = mid;
  }
  throw ConvergenceError("solve_bandwidth: bisection did not converge, residual " +
                             std::to_string(residual),
                         residual);
}

}  // namespace tsnelab

#endif  // TSNELAB_BANDWIDTH_HPP
