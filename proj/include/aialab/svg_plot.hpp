// Copyright 2026 The AIA Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aialab/aia.hpp"
#include "aialab/profile_csv.hpp"

namespace aialab {

struct PlotSeries {
  std::string label;
  Task task = Task::kGeneration;
  std::vector<double> values;
};

struct PlotOptions {
  int width = 640;
  int height = 400;
  std::string title = "Layer-wise cross-modal interaction intensity";
};

/// Self-contained SVG: x = layer, y = intensity in [0, 1], one polyline per
/// series and, when given, one shaded [T - delta, T + delta] rect per layer.
/// Output bytes depend only on the inputs.
std::string render_intensity_svg(const std::vector<PlotSeries>& series, const std::vector<LayerTarget>& bands,
                                 const PlotOptions& options = {});

}  // namespace aialab
