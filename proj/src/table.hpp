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

// CSV tables and sweep results. Floats are written with 17 significant
// digits so that reading a file back reproduces every value bit for bit.

#ifndef RDFL_TABLE_HPP_
#define RDFL_TABLE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rdfl {

// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string FormatDouble(double v);
// Inverse of FormatDouble. Throws Error(kIo) on malformed input.
double ParseDouble(std::string_view text);

struct Table {
  std::string name;
  std::string comment;  // written as a leading "# " line when non-empty
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void AddRow(std::vector<std::string> row);
  void WriteCsv(std::ostream& out) const;
  std::string ToCsv() const;
  // Fields are never quoted; commas and newlines inside a field are errors.
  static Table ReadCsv(std::istream& in, std::string name = {});
};

struct SweepRow {
  std::string series;      // curve label, e.g. "qd-rdfl" or "D1"
  double x = 0.0;          // swept value
  double u_server = 0.0;   // U_s
  double mean_u_owner = 0.0;
  double focus = 0.0;      // per-party detail; meaning depends on the sweep

  bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
  std::string name;        // table name, e.g. "sweep_eta"
  std::string variable;    // what x means
  std::string focus_name;  // what focus means
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<SweepRow> rows;

  // Columns: series, <variable>, u_server, mean_u_owner, <focus_name>.
  // Metadata travels in the table comment as "key=value" pairs.
  Table ToTable() const;
  void WriteCsv(std::ostream& out) const;
  static SweepResult ReadCsv(std::istream& in);
};

// Line chart of `y(row)` against row.x, one polyline per series.
enum class SweepAxis { kServer, kMeanOwner, kFocus };
std::string RenderSvg(const SweepResult& sweep, SweepAxis axis,
                      const std::string& title);

}  // namespace rdfl

#endif  // RDFL_TABLE_HPP_
