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

#ifndef TSNELAB_COMMON_HPP
#define TSNELAB_COMMON_HPP

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace tsnelab {

/// Row-major dense matrix; rows are points, columns are coordinates.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

/// Gaussian kernel terms exp(-u) with u more than this above the smallest
/// exponent of their sum are dropped. exp(-38) < 2^-54, so once the largest
/// term is in, a dropped term could not change the running sum.
inline constexpr double kNegligibleExponent = 38.0;

inline std::span<const double> row_span(const Matrix& m, std::size_t i) {
  return {m.data() + i * static_cast<std::size_t>(m.cols()),
          static_cast<std::size_t>(m.cols())};
}

inline double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Errors

/// A point was evaluated outside the domain of a density or map.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A perplexity target outside the open interval the data can attain.
class UnachievableTarget : public std::invalid_argument {
 public:
  UnachievableTarget(const std::string& what, double lo, double hi)
      : std::invalid_argument(what), feasible_lo(lo), feasible_hi(hi) {}
  double feasible_lo;
  double feasible_hi;
};

/// An iterative solver ran out of steps.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double res)
      : std::runtime_error(what), residual(res) {}
  double residual;
};

/// Non-finite values or sustained energy increase during descent.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t at)
      : std::runtime_error(what), step(at) {}
  std::size_t step;
};

// ---------------------------------------------------------------------------
// Random numbers
//
// Uniforms and normals are derived from raw 64-bit engine output rather than
// the standard distributions, whose algorithms are implementation defined.
// This keeps datasets bit-identical across standard library vendors.

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal by the polar Box-Muller method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tsnelab

#endif  // TSNELAB_COMMON_HPP
