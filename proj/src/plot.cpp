// Copyright 2026 The Sonda Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sonda/plot.hpp"

#include <algorithm>
#include <cstdio>

namespace sonda::stimulus {

namespace {

constexpr double kMargin = 0.08;

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c; break;
    }
  }
  return out;
}

// Maps [lo, hi] onto [a, b]; a degenerate range lands in the middle.
double scale(double v, double lo, double hi, double a, double b) {
  if (hi == lo) return (a + b) / 2.0;
  return a + (v - lo) / (hi - lo) * (b - a);
}

}  // namespace

std::string render_plot(const DataSeries& series, int width_px, int height_px) {
  if (width_px < 64 || height_px < 64) {
    throw StimulusError(ErrorKind::invalid_spec, "plot must be at least 64x64 pixels");
  }
  check(series);

  const std::size_t n = series.y.size();
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = series.x.empty() ? static_cast<double>(k) : series.x[k];
  }
  const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
  const auto [ylo, yhi] = std::minmax_element(series.y.begin(), series.y.end());

  const double w = width_px;
  const double h = height_px;
  const double left = w * kMargin;
  const double right = w * (1.0 - kMargin);
  const double top = h * kMargin;
  const double bottom = h * (1.0 - kMargin);

  std::string points;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) points += ' ';
    points += coord(scale(xs[k], *xlo, *xhi, left, right));
    points += ',';
    // Larger values sit higher on screen.
    points += coord(scale(series.y[k], *ylo, *yhi, bottom, top));
  }

  const std::string ws = std::to_string(width_px);
  const std::string hs = std::to_string(height_px);
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + ws +
         "\" height=\"" + hs + "\" viewBox=\"0 0 " + ws + " " + hs + "\">\n";
  if (!series.name.empty()) svg += "  <title>" + xml_escape(series.name) + "</title>\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + ws + "\" height=\"" + hs + "\" fill=\"#ffffff\"/>\n";
  svg += "  <rect x=\"" + coord(left) + "\" y=\"" + coord(top) + "\" width=\"" +
         coord(right - left) + "\" height=\"" + coord(bottom - top) +
         "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
  svg += "  <polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" "
         "stroke-linejoin=\"round\" points=\"" + points + "\"/>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace sonda::stimulus
