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

#ifndef TSNELAB_SVG_PLOT_HPP
#define TSNELAB_SVG_PLOT_HPP

#include <string>
#include <vector>

namespace tsnelab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = true;
  std::vector<PlotSeries> series;
};

/// Line plot with markers as a standalone SVG document. Points that cannot
/// be placed on a log axis (nonpositive or non-finite) are dropped.
std::string render_svg(const PlotSpec& spec);

}  // namespace tsnelab

#endif  // TSNELAB_SVG_PLOT_HPP
