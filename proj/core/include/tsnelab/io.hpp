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

#ifndef TSNELAB_IO_HPP
#define TSNELAB_IO_HPP

#include "tsnelab/bandwidth.hpp"
#include "tsnelab/continuum.hpp"
#include "tsnelab/density.hpp"
#include "tsnelab/energy.hpp"
#include "tsnelab/optimize.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tsnelab {

/// Shortest round-trip text for a double ("%.17g").
std::string format_double(double v);

/// Plain numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
/// Points from columns x0..x{d-1}.
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Columns i,sigma,h,kappa,mode.
void write_profile_csv(const std::filesystem::path& path, const BandwidthProfile& profile);
BandwidthProfile read_profile_csv(const std::filesystem::path& path);

/// Columns y0..y{m-1}.
void write_embedding_csv(const std::filesystem::path& path, const Embedding& e);
Embedding read_embedding_csv(const std::filesystem::path& path);

/// Columns node_index,x0..x{d-1},t0..t{m-1}.
void write_gridmap_csv(const std::filesystem::path& path, const GridMap& map);
/// Rebuilds the midpoint grid from the node coordinates; needs at least two
/// nodes per axis.
GridMap read_gridmap_csv(const std::filesystem::path& path);

/// Columns step,attract,repulse,total,grad_norm,diameter,rms_spread.
void write_trace_csv(std::ostream& out, const OptimizationTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const OptimizationTrace& trace);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace tsnelab

#endif  // TSNELAB_IO_HPP
