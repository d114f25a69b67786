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

#include "segworld/cli/plots.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "segworld/error.hpp"

namespace segworld::cli {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw UnreadableFile("cannot write " + path.string());
  return out;
}

std::filesystem::path sidecar(const std::filesystem::path& p) {
  auto s = p;
  return s.replace_extension(".csv");
}

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_line_plot(const std::filesystem::path& svg, const std::string& title, const std::string& x_name,
                     const std::vector<double>& x, const std::vector<Series>& series) {
  for (const auto& s : series) {
    if (s.y.size() != x.size()) throw DimensionMismatch("series " + s.name + " does not match the x axis");
  }
  {
    auto csv = open_out(sidecar(svg));
    csv << x_name;
    for (const auto& s : series) csv << ',' << s.name;
    csv << '\n';
    for (std::size_t i = 0; i < x.size(); ++i) {
      csv << format_number(x[i]);
      for (const auto& s : series) csv << ',' << format_number(s.y[i]);
      csv << '\n';
    }
  }

  const double w = 640, h = 400, left = 60, right = 150, top = 40, bottom = 50;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!x.empty()) {
    x0 = *std::min_element(x.begin(), x.end());
    x1 = *std::max_element(x.begin(), x.end());
  }
  bool any = false;
  for (const auto& s : series) {
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      y0 = any ? std::min(y0, v) : v;
      y1 = any ? std::max(y1, v) : v;
      any = true;
    }
  }
  y0 = std::min(y0, 0.0);
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  auto px = [&](double v) { return left + (v - x0) / (x1 - x0) * (w - left - right); };
  auto py = [&](double v) { return h - bottom - (v - y0) / (y1 - y0) * (h - top - bottom); };

  auto out = open_out(svg);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
      << "</text>\n"
      << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 15
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_name << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y0 + (y1 - y0) * k / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(v) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_number(std::round(v * 1000) / 1000)
        << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::isfinite(series[s].y[i])) out << px(x[i]) << ',' << py(series[s].y[i]) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << w - right + 10 << "\" y=\"" << top + 16 * (s + 1) << "\" fill=\"" << color
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
}

void write_heatmap(const std::filesystem::path& pgm, const autodiff::Matrix& values, int cell_pixels) {
  {
    auto csv = open_out(sidecar(pgm));
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      for (Eigen::Index c = 0; c < values.cols(); ++c) csv << (c ? "," : "") << format_number(values(r, c));
      csv << '\n';
    }
  }
  const double lo = values.size() ? values.minCoeff() : 0.0;
  const double hi = values.size() ? values.maxCoeff() : 1.0;
  const double span = hi > lo ? hi - lo : 1.0;
  const auto rows = static_cast<int>(values.rows()) * cell_pixels;
  const auto cols = static_cast<int>(values.cols()) * cell_pixels;
  auto out = open_out(pgm, true);
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const double v = (values(y / cell_pixels, x / cell_pixels) - lo) / span;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
}

}  // namespace segworld::cli
