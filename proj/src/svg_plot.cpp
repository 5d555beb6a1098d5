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

#include "aialab/svg_plot.hpp"

#include <algorithm>
#include <cstdio>

#include "aialab/errors.hpp"

namespace aialab {

namespace {

constexpr double kLeft = 60.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

// Palette cycled across series.
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_intensity_svg(const std::vector<PlotSeries>& series, const std::vector<LayerTarget>& bands,
                                 const PlotOptions& options) {
  if (series.empty()) throw InputError("nothing to plot");
  std::size_t depth = bands.size();
  for (const auto& s : series) {
    if (s.values.empty()) throw InputError("series '" + s.label + "' is empty");
    depth = std::max(depth, s.values.size());
  }
  const double w = options.width, h = options.height;
  const double plot_w = w - kLeft - kRight, plot_h = h - kTop - kBottom;
  // Layers sit at cell centres so a depth-1 profile still has width.
  const double cell = plot_w / static_cast<double>(depth);
  const auto x_of = [&](double layer) { return kLeft + (layer + 0.5) * cell; };
  const auto y_of = [&](double v) { return kTop + (1.0 - std::clamp(v, 0.0, 1.0)) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.width) + "\" height=\"" +
         std::to_string(options.height) + "\" viewBox=\"0 0 " + std::to_string(options.width) + " " +
         std::to_string(options.height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + num(w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape(options.title) + "</text>\n";

  for (std::size_t l = 0; l < bands.size(); ++l) {
    const LayerTarget& b = bands[l];
    const double top = y_of(b.target + b.delta), bottom = y_of(b.target - b.delta);
    svg += "<rect class=\"band\" data-layer=\"" + std::to_string(l) + "\" data-target=\"" + format_double(b.target) +
           "\" data-delta=\"" + format_double(b.delta) + "\" x=\"" + num(kLeft + l * cell) + "\" y=\"" + num(top) +
           "\" width=\"" + num(cell) + "\" height=\"" + num(bottom - top) + "\" fill=\"#999999\" fill-opacity=\"0.25\"/>\n";
  }

  // Axes and gridlines.
  svg += "<g stroke=\"#000000\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + plot_h) + "\" x2=\"" + num(kLeft + plot_w) + "\" y2=\"" +
         num(kTop + plot_h) + "\"/>\n";
  svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y_of(v)) + "\" x2=\"" + num(kLeft + plot_w) + "\" y2=\"" +
           num(y_of(v)) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y_of(v) + 4) + "\" text-anchor=\"end\">" + num(v).substr(0, 3) +
           "</text>\n";
  }
  const std::size_t stride = std::max<std::size_t>(1, depth / 16);
  for (std::size_t l = 0; l < depth; l += stride) {
    svg += "<text x=\"" + num(x_of(static_cast<double>(l))) + "\" y=\"" + num(kTop + plot_h + 16) +
           "\" text-anchor=\"middle\">" + std::to_string(l) + "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(h - 12) + "\" text-anchor=\"middle\">layer</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kTop + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kTop + plot_h / 2) + ")\">intensity</text>\n";
  svg += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    std::string points;
    for (std::size_t l = 0; l < s.values.size(); ++l) {
      if (l) points += ' ';
      points += num(x_of(static_cast<double>(l))) + "," + num(y_of(s.values[l]));
    }
    svg += "<polyline class=\"series\" data-label=\"" + escape(s.label) + "\" data-task=\"" + std::string(to_string(s.task)) +
           "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    svg += "<text x=\"" + num(kLeft + 8) + "\" y=\"" + num(kTop + 14 + 14 * static_cast<double>(i)) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" + escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace aialab
