// Copyright 2026 The SegWorld Authors. All Rights Reserved.
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

// Plot files with numeric sidecars. Every plot is written next to a CSV that
// holds exactly the plotted numbers.

#include <filesystem>
#include <string>
#include <vector>

#include "segworld/engine/autodiff.hpp"

namespace segworld::cli {

struct Series {
  std::string name;
  std::vector<double> y;
};

/// Line chart over a shared x axis as SVG, plus `<stem>.csv` with one column
/// per series.
void write_line_plot(const std::filesystem::path& svg, const std::string& title, const std::string& x_name,
                     const std::vector<double>& x, const std::vector<Series>& series);

/// Grey-level heat image (binary PGM, min to black, max to white) plus
/// `<stem>.csv` holding the matrix.
void write_heatmap(const std::filesystem::path& pgm, const autodiff::Matrix& values, int cell_pixels = 8);

/// Full-precision decimal form used in every sidecar.
std::string format_number(double v);

}  // namespace segworld::cli
