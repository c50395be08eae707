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


#include "tsnelab/smooth_map.hpp"

#include <cmath>
#include <stdexcept>

namespace tsnelab {

namespace {

double ipow(double x, unsigned k) {
  double r = 1.0;
  for (unsigned i = 0; i < k; ++i) r *= x;
  return r;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("SmoothMap: expected a nonempty matrix");
  const auto rows = j.size(), cols = j.at(0).size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw std::invalid_argument("SmoothMap: ragged matrix");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json to_json_matrix(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

nlohmann::json to_json_vector(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

SmoothMap::SmoothMap(std::size_t input_dim, std::size_t output_dim) : d_(input_dim), m_(output_dim) {
  if (d_ == 0 || m_ == 0) throw std::invalid_argument("SmoothMap: dimensions must be positive");
}

SmoothMap SmoothMap::constant(std::size_t input_dim, Vector value) {
  const auto m = static_cast<Eigen::Index>(value.size());
  return linear(Matrix::Zero(m, static_cast<Eigen::Index>(input_dim)), std::move(value));
}

SmoothMap SmoothMap::identity(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return linear(Matrix::Identity(n, n), Vector::Zero(n));
}

SmoothMap SmoothMap::linear(Matrix a, Vector b) {
  SmoothMap t(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(a.rows()));
  t.add(Linear{std::move(a), std::move(b)});
  return t;
}

SmoothMap SmoothMap::polynomial(std::size_t input_dim, std::size_t output_dim,
                                std::vector<Monomial> monomials) {
  SmoothMap t(input_dim, output_dim);
  t.add(Polynomial{std::move(monomials)});
  return t;
}

SmoothMap SmoothMap::sinusoid(Vector amplitude, Matrix frequency, Vector phase) {
  SmoothMap t(static_cast<std::size_t>(frequency.cols()), static_cast<std::size_t>(frequency.rows()));
  t.add(Sinusoid{std::move(amplitude), std::move(frequency), std::move(phase)});
  return t;
}

void SmoothMap::check_term(const Term& term) const {
  const auto d = static_cast<Eigen::Index>(d_), m = static_cast<Eigen::Index>(m_);
  if (const auto* l = std::get_if<Linear>(&term)) {
    if (l->a.rows() != m || l->a.cols() != d || l->b.size() != m)
      throw std::invalid_argument("SmoothMap: linear term has the wrong shape");
    if (!l->a.allFinite() || !l->b.allFinite())
      throw std::invalid_argument("SmoothMap: linear term is not finite");
  } else if (const auto* p = std::get_if<Polynomial>(&term)) {
    for (const auto& mono : p->monomials) {
      if (mono.output >= m_ || mono.exponents.size() != d_)
        throw std::invalid_argument("SmoothMap: monomial has the wrong shape");
      unsigned degree = 0;
      for (auto e : mono.exponents) degree += e;
      if (degree > kMaxDegree)
        throw std::invalid_argument("SmoothMap: polynomial degree exceeds 4");
      if (!std::isfinite(mono.coefficient))
        throw std::invalid_argument("SmoothMap: monomial coefficient is not finite");
    }
  } else {
    const auto& s = std::get<Sinusoid>(term);
    if (s.amplitude.size() != m || s.phase.size() != m || s.frequency.rows() != m ||
        s.frequency.cols() != d)
      throw std::invalid_argument("SmoothMap: sinusoid term has the wrong shape");
    if (!s.amplitude.allFinite() || !s.frequency.allFinite() || !s.phase.allFinite())
      throw std::invalid_argument("SmoothMap: sinusoid term is not finite");
  }
}

SmoothMap& SmoothMap::add(Term term) {
  check_term(term);
  terms_.push_back(std::move(term));
  return *this;
}

SmoothMap SmoothMap::operator+(const SmoothMap& other) const {
  if (other.d_ != d_ || other.m_ != m_) throw std::invalid_argument("SmoothMap: shape mismatch");
  SmoothMap out = *this;
  for (const auto& t : other.terms_) out.terms_.push_back(t);
  return out;
}

SmoothMap SmoothMap::scaled(double lambda) const {
  SmoothMap out(d_, m_);
  for (const auto& term : terms_) {
    if (const auto* l = std::get_if<Linear>(&term)) {
      out.add(Linear{lambda * l->a, lambda * l->b});
    } else if (const auto* p = std::get_if<Polynomial>(&term)) {
      Polynomial q = *p;
      for (auto& mono : q.monomials) mono.coefficient *= lambda;
      out.add(std::move(q));
    } else {
      Sinusoid s = std::get<Sinusoid>(term);
      s.amplitude *= lambda;
      out.add(std::move(s));
    }
  }
  return out;
}

SmoothMap SmoothMap::translated(const Vector& c) const {
  if (static_cast<std::size_t>(c.size()) != m_) throw std::invalid_argument("SmoothMap: shape mismatch");
  SmoothMap out = *this;
  out.add(Linear{Matrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(d_)), c});
  return out;
}

void SmoothMap::eval(std::span<const double> x, double* out) const {
  if (x.size() != d_) throw std::invalid_argument("SmoothMap: input dimension mismatch");
  for (std::size_t l = 0; l < m_; ++l) out[l] = 0.0;
  for (const auto& term : terms_) {
    if (const auto* lin = std::get_if<Linear>(&term)) {
      for (std::size_t l = 0; l < m_; ++l) {
        double s = lin->b[static_cast<Eigen::Index>(l)];
        for (std::size_t k = 0; k < d_; ++k)
          s += lin->a(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) * x[k];
        out[l] += s;
      }
    } else if (const auto* p = std::get_if<Polynomial>(&term)) {
      for (const auto& mono : p->monomials) {
        double v = mono.coefficient;
        for (std::size_t k = 0; k < d_; ++k) v *= ipow(x[k], mono.exponents[k]);
        out[mono.output] += v;
      }
    } else {
      const auto& s = std::get<Sinusoid>(term);
      for (std::size_t l = 0; l < m_; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        double arg = s.phase[li];
        for (std::size_t k = 0; k < d_; ++k) arg += s.frequency(li, static_cast<Eigen::Index>(k)) * x[k];
        out[l] += s.amplitude[li] * std::sin(arg);
      }
    }
  }
}

Vector SmoothMap::operator()(std::span<const double> x) const {
  Vector v(static_cast<Eigen::Index>(m_));
  eval(x, v.data());
  return v;
}

Matrix SmoothMap::jacobian(std::span<const double> x) const {
  if (x.size() != d_) throw std::invalid_argument("SmoothMap: input dimension mismatch");
  Matrix j = Matrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(d_));
  for (const auto& term : terms_) {
    if (const auto* lin = std::get_if<Linear>(&term)) {
      j += lin->a;
    } else if (const auto* p = std::get_if<Polynomial>(&term)) {
      for (const auto& mono : p->monomials) {
        for (std::size_t k = 0; k < d_; ++k) {
          if (mono.exponents[k] == 0) continue;
          double v = mono.coefficient * mono.exponents[k];
          for (std::size_t q = 0; q < d_; ++q)
            v *= ipow(x[q], q == k ? mono.exponents[q] - 1 : mono.exponents[q]);
          j(static_cast<Eigen::Index>(mono.output), static_cast<Eigen::Index>(k)) += v;
        }
      }
    } else {
      const auto& s = std::get<Sinusoid>(term);
      for (std::size_t l = 0; l < m_; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        double arg = s.phase[li];
        for (std::size_t k = 0; k < d_; ++k) arg += s.frequency(li, static_cast<Eigen::Index>(k)) * x[k];
        const double c = s.amplitude[li] * std::cos(arg);
        for (std::size_t k = 0; k < d_; ++k)
          j(li, static_cast<Eigen::Index>(k)) += c * s.frequency(li, static_cast<Eigen::Index>(k));
      }
    }
  }
  return j;
}

double SmoothMap::gradient_norm2(std::span<const double> x) const {
  return jacobian(x).squaredNorm();
}

SmoothMap SmoothMap::from_json(const nlohmann::json& j) {
  const auto d = j.at("input_dim").get<std::size_t>();
  const auto m = j.at("output_dim").get<std::size_t>();
  SmoothMap t(d, m);
  const auto nd = static_cast<Eigen::Index>(d), nm = static_cast<Eigen::Index>(m);
  for (const auto& term : j.at("terms")) {
    const auto type = term.at("type").get<std::string>();
    if (type == "linear") {
      t.add(Linear{matrix_from_json(term.at("matrix")),
                   term.contains("offset") ? vector_from_json(term["offset"]) : Vector::Zero(nm)});
    } else if (type == "identity") {
      if (d != m) throw std::invalid_argument("SmoothMap: identity needs input_dim == output_dim");
      t.add(Linear{Matrix::Identity(nd, nd), Vector::Zero(nd)});
    } else if (type == "constant") {
      t.add(Linear{Matrix::Zero(nm, nd), vector_from_json(term.at("value"))});
    } else if (type == "polynomial") {
      Polynomial p;
      for (const auto& mono : term.at("monomials"))
        p.monomials.push_back({mono.value("output", std::size_t{0}),
                               mono.at("exponents").get<std::vector<unsigned>>(),
                               mono.at("coefficient").get<double>()});
      t.add(std::move(p));
    } else if (type == "sinusoid") {
      t.add(Sinusoid{vector_from_json(term.at("amplitude")), matrix_from_json(term.at("frequency")),
                     term.contains("phase") ? vector_from_json(term["phase"]) : Vector::Zero(nm)});
    } else {
      throw std::invalid_argument("SmoothMap: unknown term type '" + type + "'");
    }
  }
  return t;
}

nlohmann::json SmoothMap::to_json() const {
  nlohmann::json j;
  j["input_dim"] = d_;
  j["output_dim"] = m_;
  j["terms"] = nlohmann::json::array();
  for (const auto& term : terms_) {
    nlohmann::json t;
    if (const auto* l = std::get_if<Linear>(&term)) {
      t["type"] = "linear";
      t["matrix"] = to_json_matrix(l->a);
      t["offset"] = to_json_vector(l->b);
    } else if (const auto* p = std::get_if<Polynomial>(&term)) {
      t["type"] = "polynomial";
      t["monomials"] = nlohmann::json::array();
      for (const auto& mono : p->monomials)
        t["monomials"].push_back(
            {{"output", mono.output}, {"exponents", mono.exponents}, {"coefficient", mono.coefficient}});
    } else {
      const auto& s = std::get<Sinusoid>(term);
      t["type"] = "sinusoid";
      t["amplitude"] = to_json_vector(s.amplitude);
      t["frequency"] = to_json_matrix(s.frequency);
      t["phase"] = to_json_vector(s.phase);
    }
    j["terms"].push_back(std::move(t));
  }
  return j;
}

Embedding apply_map(const SmoothMap& map, const Dataset& data) {
  if (data.dim() != map.input_dim()) throw std::invalid_argument("apply_map: dimension mismatch");
  Embedding e;
  e.provenance = EmbeddingProvenance::map_applied;
  e.y.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(map.output_dim()));
  for (std::size_t i = 0; i < data.size(); ++i)
    map.eval(data.point(i), e.y.data() + i * map.output_dim());
  return e;
}

}  // namespace tsnelab
