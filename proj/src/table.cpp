/*
 * Copyright 2026 The rdfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "error.hpp"

namespace rdfl {

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double ParseDouble(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    Fail(ErrorCode::kIo, "malformed number '" + std::string(text) + "'");
  }
  return v;
}

void Table::AddRow(std::vector<std::string> row) {
  Require(row.size() == header.size(), ErrorCode::kInvalidArgument,
          "row width does not match the header");
  rows.push_back(std::move(row));
}

void Table::WriteCsv(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      Require(fields[i].find_first_of(",\n") == std::string::npos,
              ErrorCode::kIo, "CSV field contains a separator");
      if (i) out << ',';
      out << fields[i];
    }
    out << '\n';
  };
  if (!comment.empty()) out << "# " << comment << '\n';
  line(header);
  for (const auto& row : rows) line(row);
}

std::string Table::ToCsv() const {
  std::ostringstream out;
  WriteCsv(out);
  return out.str();
}

Table Table::ReadCsv(std::istream& in, std::string name) {
  Table table;
  table.name = std::move(name);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.header.size()) {
        Fail(ErrorCode::kIo, "CSV row has " + std::to_string(fields.size()) +
                                 " fields, header has " +
                                 std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  Require(have_header, ErrorCode::kIo, "CSV input has no header");
  return table;
}

Table SweepResult::ToTable() const {
  Table t;
  t.name = name;
  t.comment = "name=" + name + " config_hash=" + config_hash +
              " seed=" + std::to_string(seed);
  t.header = {"series", variable, "u_server", "mean_u_owner", focus_name};
  for (const auto& r : rows) {
    t.rows.push_back({r.series, FormatDouble(r.x), FormatDouble(r.u_server),
                      FormatDouble(r.mean_u_owner), FormatDouble(r.focus)});
  }
  return t;
}

void SweepResult::WriteCsv(std::ostream& out) const {
  ToTable().WriteCsv(out);
}

SweepResult SweepResult::ReadCsv(std::istream& in) {
  SweepResult out;
  std::string first;
  std::getline(in, first);
  Require(first.rfind("# ", 0) == 0, ErrorCode::kIo,
          "sweep CSV is missing its metadata line");
  std::istringstream meta(first.substr(2));
  std::string item;
  while (meta >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "name") {
      out.name = value;
    } else if (key == "config_hash") {
      out.config_hash = value;
    } else if (key == "seed") {
      out.seed = std::stoull(value);
    }
  }
  const Table t = Table::ReadCsv(in, out.name);
  Require(t.header.size() == 5, ErrorCode::kIo,
          "sweep CSV must have five columns");
  out.variable = t.header[1];
  out.focus_name = t.header[4];
  for (const auto& row : t.rows) {
    out.rows.push_back({row[0], ParseDouble(row[1]), ParseDouble(row[2]),
                        ParseDouble(row[3]), ParseDouble(row[4])});
  }
  return out;
}

std::string RenderSvg(const SweepResult& sweep, SweepAxis axis,
                      const std::string& title) {
  auto value = [axis](const SweepRow& r) {
    switch (axis) {
      case SweepAxis::kServer:
        return r.u_server;
      case SweepAxis::kMeanOwner:
        return r.mean_u_owner;
      case SweepAxis::kFocus:
        return r.focus;
    }
    return r.focus;
  };
  const char* y_label = axis == SweepAxis::kServer      ? "u_server"
                        : axis == SweepAxis::kMeanOwner ? "mean_u_owner"
                                                        : nullptr;
  const std::string y_name = y_label ? y_label : sweep.focus_name;

  // Series keep their first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& r : sweep.rows) {
    const double y = value(r);
    if (!std::isfinite(r.x) || !std::isfinite(y)) continue;
    if (!series.count(r.series)) order.push_back(r.series);
    series[r.series].push_back({r.x, y});
    x0 = std::min(x0, r.x);
    x1 = std::max(x1, r.x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (order.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;

  constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 150, kTop = 40,
                   kBottom = 50;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  std::ostringstream svg;
  char buf[128];
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\">"
      << title << "</text>\n";
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" "
                "fill=\"none\" stroke=\"black\"/>\n",
                kLeft, kTop, pw, ph);
  svg << buf;
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.3g"
                  "</text>\n",
                  px(fx), kTop + ph + 16, fx);
    svg << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.3g"
                  "</text>\n",
                  kLeft - 6, py(fy) + 4, fy);
    svg << buf;
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10
      << "\" text-anchor=\"middle\">" << sweep.variable << "</text>\n";
  svg << "<text x=\"16\" y=\"" << kTop + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + ph / 2 << ")\">" << y_name << "</text>\n";

  for (std::size_t s = 0; s < order.size(); ++s) {
    const char* color = kColors[s % 8];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[order[s]]) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(x), py(y));
      svg << buf;
    }
    svg << "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(s) + 8;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%.1f\" x2=\"%g\" y2=\"%.1f\" "
                  "stroke=\"%s\" stroke-width=\"2\"/>",
                  kW - kRight + 10, ly, kW - kRight + 30, ly, color);
    svg << buf << "<text x=\"" << kW - kRight + 36 << "\" y=\"" << ly + 4
        << "\">" << order[s] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rdfl
