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

#include "tsnelab/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace tsnelab {

namespace {

// 5-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::vector<double> as_vector(const nlohmann::json& j, std::size_t d, const char* what) {
  if (j.is_number()) return std::vector<double>(d, j.get<double>());
  auto v = j.get<std::vector<double>>();
  if (v.size() != d) {
    std::ostringstream os;
    os << what << ": expected " << d << " entries, got " << v.size();
    throw std::invalid_argument(os.str());
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain

Domain::Domain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty()) throw std::invalid_argument("Domain: dimension must be at least 1");
  if (lower_.size() != upper_.size())
    throw std::invalid_argument("Domain: lower and upper differ in dimension");
  for (std::size_t k = 0; k < lower_.size(); ++k) {
    if (!(std::isfinite(lower_[k]) && std::isfinite(upper_[k]) && lower_[k] < upper_[k]))
      throw std::invalid_argument("Domain: need finite lower[k] < upper[k] on every axis");
  }
}

Domain Domain::unit(std::size_t d) {
  return Domain(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
}

double Domain::volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) v *= extent(k);
  return v;
}

double Domain::diameter() const {
  double s = 0.0;
  for (std::size_t k = 0; k < dim(); ++k) s += extent(k) * extent(k);
  return std::sqrt(s);
}

bool Domain::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t k = 0; k < dim(); ++k) {
    if (!(x[k] >= lower_[k] && x[k] <= upper_[k])) return false;
  }
  return true;
}

double Domain::distance_to_boundary(std::span<const double> x) const {
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dim(); ++k) {
    dist = std::min({dist, x[k] - lower_[k], upper_[k] - x[k]});
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Density construction

Density::Density(Domain domain, DensityKind kind) : domain_(std::move(domain)), kind_(kind) {}

Density Density::uniform(Domain domain) {
  Density rho(std::move(domain), DensityKind::uniform);
  rho.normalization_ = rho.domain_.volume();
  rho.uniform_value_ = 1.0 / rho.normalization_;
  rho.finalize();
  return rho;
}

Density Density::gaussian_mixture(Domain domain, std::vector<GaussianComponent> components) {
  if (components.empty()) throw std::invalid_argument("gaussian_mixture: no components");
  Density rho(std::move(domain), DensityKind::gaussian_mixture);
  const std::size_t d = rho.dim();
  double total_weight = 0.0;
  for (const auto& c : components) {
    if (c.mean.size() != d || c.scale.size() != d)
      throw std::invalid_argument("gaussian_mixture: component dimension mismatch");
    if (!(c.weight > 0.0)) throw std::invalid_argument("gaussian_mixture: weights must be positive");
    for (double s : c.scale) {
      if (!(s > 0.0)) throw std::invalid_argument("gaussian_mixture: scales must be positive");
    }
    total_weight += c.weight;
  }
  rho.normalization_ = 0.0;
  for (const auto& c : components) {
    double box_mass = 1.0;
    double norm_const = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double lo = (rho.domain_.lower()[k] - c.mean[k]) / c.scale[k];
      const double hi = (rho.domain_.upper()[k] - c.mean[k]) / c.scale[k];
      box_mass *= normal_cdf(hi) - normal_cdf(lo);
      norm_const *= c.scale[k] * std::sqrt(2.0 * std::numbers::pi);
    }
    if (!(box_mass > 0.0))
      throw std::invalid_argument("gaussian_mixture: component has no mass inside the domain");
    const double w = c.weight / total_weight;
    rho.normalization_ += w * box_mass;
    rho.component_coef_.push_back(w / (norm_const * box_mass));
  }
  rho.components_ = std::move(components);
  rho.finalize();
  return rho;
}

Density Density::tiles(Domain domain, std::vector<std::size_t> shape, std::vector<double> values) {
  Density rho(std::move(domain), DensityKind::tiles);
  if (shape.size() != rho.dim()) throw std::invalid_argument("tiles: shape dimension mismatch");
  std::size_t count = 1;
  for (auto s : shape) {
    if (s == 0) throw std::invalid_argument("tiles: zero tiles along an axis");
    count *= s;
  }
  if (values.size() != count) throw std::invalid_argument("tiles: value count does not match shape");
  const double tile_volume = rho.domain_.volume() / static_cast<double>(count);
  double mass = 0.0;
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("tiles: values must be positive and finite");
    mass += v * tile_volume;
  }
  for (double& v : values) v /= mass;
  rho.normalization_ = mass;
  rho.tile_shape_ = std::move(shape);
  rho.tile_values_ = std::move(values);
  rho.finalize();
  return rho;
}

void Density::finalize() {
  const std::size_t d = dim();
  switch (kind_) {
    case DensityKind::uniform:
      bounds_ = {uniform_value_, uniform_value_};
      break;
    case DensityKind::tiles: {
      const auto [lo, hi] = std::minmax_element(tile_values_.begin(), tile_values_.end());
      bounds_ = {*lo, *hi};
      break;
    }
    case DensityKind::gaussian_mixture: {
      double lo = 0.0, hi = 0.0;
      for (std::size_t c = 0; c < components_.size(); ++c) {
        const auto& comp = components_[c];
        double near2 = 0.0, far2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double l = domain_.lower()[k], u = domain_.upper()[k];
          const double m = comp.mean[k], s = comp.scale[k];
          const double near = (std::clamp(m, l, u) - m) / s;
          const double far = std::max(std::abs(l - m), std::abs(u - m)) / s;
          near2 += near * near;
          far2 += far * far;
        }
        hi += component_coef_[c] * std::exp(-0.5 * near2);
        lo += component_coef_[c] * std::exp(-0.5 * far2);
      }
      bounds_ = {lo, hi};
      break;
    }
  }
  if (!(bounds_.lower > 0.0)) throw std::invalid_argument("Density: not bounded away from zero");
  const double mass = quadrature_mass();
  if (std::abs(mass - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "Density: quadrature mass " << mass << " differs from 1 by more than 1e-6";
    throw std::invalid_argument(os.str());
  }
}

// ---------------------------------------------------------------------------
// Evaluation

double Density::operator()(std::span<const double> x) const {
  if (!domain_.contains(x)) throw DomainError("Density: point outside the domain");
  return eval_unchecked(x);
}

std::size_t Density::tile_index(std::span<const double> x) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < dim(); ++k) {
    const double t = (x[k] - domain_.lower()[k]) / domain_.extent(k);
    const auto s = tile_shape_[k];
    auto cell = static_cast<std::size_t>(std::clamp(std::floor(t * static_cast<double>(s)), 0.0,
                                                    static_cast<double>(s - 1)));
    idx = idx * s + cell;
  }
  return idx;
}

double Density::eval_unchecked(std::span<const double> x) const {
  switch (kind_) {
    case DensityKind::uniform:
      return uniform_value_;
    case DensityKind::tiles:
      return tile_values_[tile_index(x)];
    case DensityKind::gaussian_mixture: {
      double v = 0.0;
      for (std::size_t c = 0; c < components_.size(); ++c) {
        const auto& comp = components_[c];
        double q = 0.0;
        for (std::size_t k = 0; k < dim(); ++k) {
          const double z = (x[k] - comp.mean[k]) / comp.scale[k];
          q += z * z;
        }
        v += component_coef_[c] * std::exp(-0.5 * q);
      }
      return v;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Integration

double Density::integrate(std::span<const double> lo, std::span<const double> hi) const {
  const std::size_t d = dim();
  switch (kind_) {
    case DensityKind::uniform: {
      double v = uniform_value_;
      for (std::size_t k = 0; k < d; ++k) v *= hi[k] - lo[k];
      return v;
    }
    case DensityKind::gaussian_mixture: {
      double total = 0.0;
      for (std::size_t c = 0; c < components_.size(); ++c) {
        const auto& comp = components_[c];
        double m = component_coef_[c];
        for (std::size_t k = 0; k < d; ++k) {
          const double s = comp.scale[k];
          m *= s * std::sqrt(2.0 * std::numbers::pi) *
               (normal_cdf((hi[k] - comp.mean[k]) / s) - normal_cdf((lo[k] - comp.mean[k]) / s));
        }
        total += m;
      }
      return total;
    }
    case DensityKind::tiles: {
      std::size_t count = tile_values_.size();
      double total = 0.0;
      for (std::size_t t = 0; t < count; ++t) {
        std::size_t rem = t;
        double overlap = 1.0;
        for (std::size_t k = d; k-- > 0;) {
          const std::size_t cell = rem % tile_shape_[k];
          rem /= tile_shape_[k];
          const double w = domain_.extent(k) / static_cast<double>(tile_shape_[k]);
          const double a = domain_.lower()[k] + w * static_cast<double>(cell);
          const double len = std::min(hi[k], a + w) - std::max(lo[k], a);
          overlap *= std::max(0.0, len);
        }
        total += tile_values_[t] * overlap;
      }
      return total;
    }
  }
  return 0.0;
}

double Density::slab_mass(std::size_t axis, double a, double b) const {
  std::vector<double> lo = domain_.lower(), hi = domain_.upper();
  lo[axis] = std::max(lo[axis], domain_.lower()[axis] + a);
  hi[axis] = std::min(hi[axis], domain_.lower()[axis] + b);
  if (!(lo[axis] < hi[axis])) return 0.0;
  return integrate(lo, hi);
}

double Density::quadrature_mass() const {
  const std::size_t d = dim();
  static constexpr std::size_t kPanels[] = {0, 400, 60, 16, 6};
  const std::size_t base = d < 5 ? kPanels[d] : 3;

  // Per-axis composite rule; tile edges coincide with panel edges.
  std::vector<std::vector<double>> nodes(d), weights(d);
  for (std::size_t k = 0; k < d; ++k) {
    std::size_t panels = base;
    if (kind_ == DensityKind::tiles) {
      const std::size_t s = tile_shape_[k];
      panels = s * ((base + s - 1) / s);
    }
    const double w = domain_.extent(k) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = domain_.lower()[k] + w * (static_cast<double>(p) + 0.5);
      for (std::size_t g = 0; g < kGlNodes.size(); ++g) {
        nodes[k].push_back(mid + 0.5 * w * kGlNodes[g]);
        weights[k].push_back(0.5 * w * kGlWeights[g]);
      }
    }
  }

  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = nodes[k][idx[k]];
      w *= weights[k][idx[k]];
    }
    total += w * eval_unchecked(x);
    std::size_t k = d;
    while (k-- > 0) {
      if (++idx[k] < nodes[k].size()) break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Serialization

Density Density::from_json(const nlohmann::json& j) {
  Domain domain(j.at("domain").at("lower").get<std::vector<double>>(),
                j.at("domain").at("upper").get<std::vector<double>>());
  const auto kind = j.at("kind").get<std::string>();
  const std::size_t d = domain.dim();
  const nlohmann::json params = j.contains("params") ? j.at("params") : nlohmann::json::object();
  if (kind == "uniform") return uniform(std::move(domain));
  if (kind == "truncated-gaussian-mixture" || kind == "gaussian_mixture") {
    std::vector<GaussianComponent> comps;
    for (const auto& c : params.at("components")) {
      GaussianComponent g;
      g.mean = as_vector(c.at("mean"), d, "component mean");
      g.scale = as_vector(c.at("scale"), d, "component scale");
      g.weight = c.value("weight", 1.0);
      comps.push_back(std::move(g));
    }
    return gaussian_mixture(std::move(domain), std::move(comps));
  }
  if (kind == "piecewise-constant-tiles" || kind == "tiles") {
    return tiles(std::move(domain), params.at("shape").get<std::vector<std::size_t>>(),
                 params.at("values").get<std::vector<double>>());
  }
  throw std::invalid_argument("Density: unknown kind '" + kind + "'");
}

nlohmann::json Density::to_json() const {
  nlohmann::json j;
  j["domain"] = {{"lower", domain_.lower()}, {"upper", domain_.upper()}};
  switch (kind_) {
    case DensityKind::uniform:
      j["kind"] = "uniform";
      j["params"] = nlohmann::json::object();
      break;
    case DensityKind::gaussian_mixture: {
      j["kind"] = "truncated-gaussian-mixture";
      nlohmann::json comps = nlohmann::json::array();
      for (const auto& c : components_)
        comps.push_back({{"mean", c.mean}, {"scale", c.scale}, {"weight", c.weight}});
      j["params"] = {{"components", comps}};
      break;
    }
    case DensityKind::tiles:
      j["kind"] = "piecewise-constant-tiles";
      j["params"] = {{"shape", tile_shape_}, {"values", tile_values_}};
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Sampling

Dataset make_dataset(Matrix points) {
  Dataset ds;
  ds.points = std::move(points);
  return ds;
}

Dataset sample(const Density& density, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample: n must be positive");
  const std::size_t d = density.dim();
  const auto& dom = density.domain();
  const double envelope = density.bounds().upper;
  Rng rng(seed);
  Dataset ds;
  ds.seed = seed;
  ds.density = std::make_shared<const Density>(density);
  ds.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n;) {
    for (std::size_t k = 0; k < d; ++k) x[k] = dom.lower()[k] + dom.extent(k) * rng.uniform();
    if (rng.uniform() * envelope < density.eval_unchecked(x)) {
      for (std::size_t k = 0; k < d; ++k) ds.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = x[k];
      ++i;
    }
  }
  return ds;
}

}  // namespace tsnelab
