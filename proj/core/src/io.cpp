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


#include "tsnelab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tsnelab {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::vector<std::size_t> prefixed_columns(const CsvTable& t, const std::string& prefix) {
  std::vector<std::size_t> cols;
  for (std::size_t k = 0;; ++k) {
    const auto name = prefix + std::to_string(k);
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) break;
    cols.push_back(static_cast<std::size_t>(it - t.header.begin()));
  }
  if (cols.empty()) throw std::invalid_argument("csv: no " + prefix + "0 column");
  return cols;
}

Matrix read_block(const CsvTable& t, const std::vector<std::size_t>& cols) {
  Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t k = 0; k < cols.size(); ++k)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = parse_double(t.rows[r].at(cols[k]));
  return m;
}

void write_matrix(std::ostream& out, const std::string& prefix, const Matrix& m) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << prefix << k;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << format_double(m(i, k));
    out << '\n';
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::invalid_argument("csv: missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      cells.push_back(cell);
    }
    return cells;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw std::invalid_argument("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw std::invalid_argument("csv: empty input");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) { write_matrix(out, "x", data.points); }

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_out(path);
  write_dataset_csv(out, data);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  return make_dataset(read_block(t, prefixed_columns(t, "x")));
}

void write_profile_csv(const std::filesystem::path& path, const BandwidthProfile& profile) {
  auto out = open_out(path);
  out << "i,sigma,h,kappa,mode\n";
  const auto mode = to_string(profile.mode);
  for (std::size_t i = 0; i < profile.size(); ++i)
    out << i << ',' << format_double(profile.sigmas[i]) << ',' << format_double(profile.h) << ','
        << format_double(profile.kappa) << ',' << mode << '\n';
}

BandwidthProfile read_profile_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const auto ci = t.column("i"), cs = t.column("sigma"), ch = t.column("h"), ck = t.column("kappa"),
             cm = t.column("mode");
  BandwidthProfile p;
  p.sigmas.assign(t.rows.size(), 0.0);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto i = static_cast<std::size_t>(parse_double(t.rows[r][ci]));
    if (i >= p.sigmas.size()) throw std::invalid_argument("profile csv: index out of range");
    p.sigmas[i] = parse_double(t.rows[r][cs]);
    p.h = parse_double(t.rows[r][ch]);
    p.kappa = parse_double(t.rows[r][ck]);
    p.mode = profile_mode_from_string(t.rows[r][cm]);
  }
  return p;
}

void write_embedding_csv(const std::filesystem::path& path, const Embedding& e) {
  auto out = open_out(path);
  write_matrix(out, "y", e.y);
}

Embedding read_embedding_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  Embedding e;
  e.y = read_block(t, prefixed_columns(t, "y"));
  return e;
}

void write_gridmap_csv(const std::filesystem::path& path, const GridMap& map) {
  auto out = open_out(path);
  const std::size_t d = map.grid.dim(), m = map.output_dim();
  out << "node_index";
  for (std::size_t k = 0; k < d; ++k) out << ",x" << k;
  for (std::size_t l = 0; l < m; ++l) out << ",t" << l;
  out << '\n';
  for (std::size_t a = 0; a < map.size(); ++a) {
    out << a;
    for (double x : map.grid.node(a)) out << ',' << format_double(x);
    for (std::size_t l = 0; l < m; ++l)
      out << ',' << format_double(map.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(l)));
    out << '\n';
  }
}

GridMap read_gridmap_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const Matrix x = read_block(t, prefixed_columns(t, "x"));
  const Matrix v = read_block(t, prefixed_columns(t, "t"));
  const std::size_t d = static_cast<std::size_t>(x.cols());
  std::vector<double> lower(d), upper(d);
  std::vector<std::size_t> counts(d);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> c;
    c.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) c.push_back(x(r, static_cast<Eigen::Index>(k)));
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    if (c.size() < 2) throw std::invalid_argument("grid map csv: need two nodes per axis");
    const double dx = (c.back() - c.front()) / static_cast<double>(c.size() - 1);
    lower[k] = c.front() - 0.5 * dx;
    upper[k] = c.back() + 0.5 * dx;
    counts[k] = c.size();
  }
  QuadratureGrid grid(Domain(lower, upper), counts);
  if (grid.size() != static_cast<std::size_t>(v.rows()))
    throw std::invalid_argument("grid map csv: node count is not a full tensor grid");
  const auto ci = t.column("node_index");
  Matrix values(v.rows(), v.cols());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto a = static_cast<Eigen::Index>(parse_double(t.rows[r][ci]));
    if (a < 0 || a >= values.rows()) throw std::invalid_argument("grid map csv: bad node index");
    values.row(a) = v.row(static_cast<Eigen::Index>(r));
  }
  return GridMap(std::move(grid), std::move(values));
}

void write_trace_csv(std::ostream& out, const OptimizationTrace& trace) {
  out << "step,attract,repulse,total,grad_norm,diameter,rms_spread\n";
  for (const auto& r : trace.records)
    out << r.step << ',' << format_double(r.attract) << ',' << format_double(r.repulse) << ','
        << format_double(r.total) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.diameter) << ',' << format_double(r.rms_spread) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const OptimizationTrace& trace) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace tsnelab
