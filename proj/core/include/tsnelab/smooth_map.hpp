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

#ifndef TSNELAB_SMOOTH_MAP_HPP
#define TSNELAB_SMOOTH_MAP_HPP

#include "tsnelab/density.hpp"
#include "tsnelab/energy.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <variant>
#include <vector>

namespace tsnelab {

/// Analytic map T: R^d -> R^m, a sum of primitive terms with exact Jacobians.
class SmoothMap {
 public:
  /// T(x) = A x + b.
  struct Linear {
    Matrix a;  // m x d
    Vector b;
  };
  struct Monomial {
    std::size_t output = 0;
    std::vector<unsigned> exponents;  // one per input coordinate
    double coefficient = 0.0;
  };
  /// Coordinate polynomial of total degree at most 4.
  struct Polynomial {
    std::vector<Monomial> monomials;
  };
  /// T_l(x) = amplitude_l * sin(frequency_l . x + phase_l).
  struct Sinusoid {
    Vector amplitude;
    Matrix frequency;  // m x d
    Vector phase;
  };
  using Term = std::variant<Linear, Polynomial, Sinusoid>;

  static constexpr unsigned kMaxDegree = 4;

  SmoothMap(std::size_t input_dim, std::size_t output_dim);

  static SmoothMap constant(std::size_t input_dim, Vector value);
  static SmoothMap identity(std::size_t d);
  static SmoothMap linear(Matrix a, Vector b);
  static SmoothMap polynomial(std::size_t input_dim, std::size_t output_dim,
                              std::vector<Monomial> monomials);
  static SmoothMap sinusoid(Vector amplitude, Matrix frequency, Vector phase);

  static SmoothMap from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  SmoothMap& add(Term term);
  SmoothMap operator+(const SmoothMap& other) const;
  /// lambda * T.
  SmoothMap scaled(double lambda) const;
  /// T + c.
  SmoothMap translated(const Vector& c) const;

  std::size_t input_dim() const { return d_; }
  std::size_t output_dim() const { return m_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// Writes T(x) into out (length m).
  void eval(std::span<const double> x, double* out) const;
  Vector operator()(std::span<const double> x) const;
  /// m x d Jacobian; row l is grad T_l.
  Matrix jacobian(std::span<const double> x) const;
  /// sum_l |grad T_l(x)|^2 without forming the Jacobian.
  double gradient_norm2(std::span<const double> x) const;

 private:
  void check_term(const Term& t) const;

  std::size_t d_, m_;
  std::vector<Term> terms_;
};

/// Rows T(X_i).
Embedding apply_map(const SmoothMap& map, const Dataset& data);

}  // namespace tsnelab

#endif  // TSNELAB_SMOOTH_MAP_HPP
