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

#ifndef SONDA_PLOT_HPP_
#define SONDA_PLOT_HPP_

#include <string>

#include "sonda/stimulus.hpp"

namespace sonda::stimulus {

/// Line plot of `series` as a standalone SVG 1.1 document: one polyline, an
/// 8% margin on every side, y growing upwards. Uses x when present, the
/// sample index otherwise. Output depends only on the arguments.
std::string render_plot(const DataSeries& series, int width_px, int height_px);

}  // namespace sonda::stimulus

#endif  // SONDA_PLOT_HPP_
