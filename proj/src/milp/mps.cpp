// Copyright 2026 The BranchLab Authors.
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

#include <algorithm>
#include <cmath>
#include <optional>
#include <unordered_map>

#include "branchlab/milp.hpp"
#include "text_util.hpp"

namespace branchlab {

namespace {

enum class Section { kNone, kName, kRows, kColumns, kRhs, kBounds, kEnd };

double mps_number(const std::string& token, int line_no) {
  const double v = detail::parse_number(token, line_no);
  if (v >= 1e30) return kInf;
  if (v <= -1e30) return -kInf;
  return v;
}

}  // namespace

MilpInstance parse_mps(std::string_view text) {
  RawModel model;
  std::optional<std::string> objective_row;
  std::unordered_map<std::string, int> row_index;
  std::unordered_map<std::string, int> col_index;
  Section section = Section::kNone;
  bool in_integer_block = false;
  int line_no = 0;

  auto row_of = [&](const std::string& name) -> int {
    if (objective_row && name == *objective_row) return -1;
    auto it = row_index.find(name);
    if (it == row_index.end()) {
      throw ParseError("unknown row '" + name + "'", line_no);
    }
    return it->second;
  };
  auto col_of = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end()) {
      throw ParseError("undeclared variable '" + name + "'", line_no);
    }
    return it->second;
  };

  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    if (line.empty() || line[0] == '*') continue;
    const auto tokens = detail::tokenize(line);
    if (tokens.empty()) continue;
    if (section == Section::kEnd) {
      throw ParseError("content after ENDATA", line_no);
    }

    const bool header = !std::isspace(static_cast<unsigned char>(line[0]));
    if (header) {
      const std::string& key = tokens[0];
      if (key == "NAME") {
        model.name = tokens.size() > 1 ? tokens[1] : "mps";
        section = Section::kName;
      } else if (key == "ROWS") {
        section = Section::kRows;
      } else if (key == "COLUMNS") {
        section = Section::kColumns;
      } else if (key == "RHS") {
        section = Section::kRhs;
      } else if (key == "BOUNDS") {
        section = Section::kBounds;
      } else if (key == "ENDATA") {
        section = Section::kEnd;
      } else if (key == "RANGES") {
        throw ParseError("RANGES section is not supported", line_no);
      } else {
        throw ParseError("unsupported MPS section '" + key + "'", line_no);
      }
      continue;
    }

    switch (section) {
      case Section::kRows: {
        if (tokens.size() != 2) throw ParseError("malformed ROWS line", line_no);
        const std::string& kind = tokens[0];
        if (kind == "N") {
          // Additional free rows are ignored, as most readers do.
          if (!objective_row) objective_row = tokens[1];
          break;
        }
        RawRow row;
        row.name = tokens[1];
        if (kind == "L") {
          row.sense = RowSense::kLe;
        } else if (kind == "G") {
          row.sense = RowSense::kGe;
        } else if (kind == "E") {
          row.sense = RowSense::kEq;
        } else {
          throw ParseError("unknown row type '" + kind + "'", line_no);
        }
        if (!row_index.emplace(row.name, static_cast<int>(model.rows.size()))
                 .second) {
          throw ParseError("duplicate row '" + row.name + "'", line_no);
        }
        model.rows.push_back(std::move(row));
        break;
      }
      case Section::kColumns: {
        if (tokens.size() >= 3 && tokens[1] == "'MARKER'") {
          if (tokens[2] == "'INTORG'") {
            in_integer_block = true;
          } else if (tokens[2] == "'INTEND'") {
            in_integer_block = false;
          } else {
            throw ParseError("unknown marker " + tokens[2], line_no);
          }
          break;
        }
        if (tokens.size() != 3 && tokens.size() != 5) {
          throw ParseError("malformed COLUMNS line", line_no);
        }
        auto [it, inserted] =
            col_index.emplace(tokens[0], static_cast<int>(model.c.size()));
        if (inserted) {
          model.var_names.push_back(tokens[0]);
          model.c.push_back(0.0);
          model.lower.push_back(0.0);
          model.upper.push_back(kInf);
          model.integer.push_back(in_integer_block);
        } else if (it->second != static_cast<int>(model.c.size()) - 1) {
          throw ParseError("column '" + tokens[0] + "' is not contiguous",
                           line_no);
        }
        const int col = it->second;
        for (std::size_t t = 1; t + 1 < tokens.size(); t += 2) {
          const double value = detail::parse_number(tokens[t + 1], line_no);
          const int r = row_of(tokens[t]);
          if (r < 0) {
            model.c[col] += value;
          } else {
            model.rows[r].terms.emplace_back(col, value);
          }
        }
        break;
      }
      case Section::kRhs: {
        if (tokens.size() != 3 && tokens.size() != 5) {
          throw ParseError("malformed RHS line", line_no);
        }
        for (std::size_t t = 1; t + 1 < tokens.size(); t += 2) {
          const double value = detail::parse_number(tokens[t + 1], line_no);
          const int r = row_of(tokens[t]);
          if (r >= 0) model.rows[r].rhs = value;
          // An objective-row rhs is a constant offset; dropped.
        }
        break;
      }
      case Section::kBounds: {
        const std::string& type = tokens[0];
        const bool valueless = type == "FR" || type == "MI" || type == "PL" ||
                               type == "BV";
        if (tokens.size() != (valueless ? 3u : 4u) &&
            !(valueless && tokens.size() == 4)) {
          throw ParseError("malformed BOUNDS line", line_no);
        }
        const int col = col_of(tokens[2]);
        const double value =
            tokens.size() == 4 ? mps_number(tokens[3], line_no) : 0.0;
        if (type == "UP") {
          model.upper[col] = value;
        } else if (type == "LO") {
          model.lower[col] = value;
        } else if (type == "FX") {
          model.lower[col] = model.upper[col] = value;
        } else if (type == "FR") {
          model.lower[col] = -kInf;
          model.upper[col] = kInf;
        } else if (type == "MI") {
          model.lower[col] = -kInf;
        } else if (type == "PL") {
          model.upper[col] = kInf;
        } else if (type == "BV") {
          model.lower[col] = 0.0;
          model.upper[col] = 1.0;
          model.integer[col] = true;
        } else if (type == "LI") {
          model.lower[col] = value;
          model.integer[col] = true;
        } else if (type == "UI") {
          model.upper[col] = value;
          model.integer[col] = true;
        } else {
          throw ParseError("unsupported bound type '" + type + "'", line_no);
        }
        if (model.lower[col] > model.upper[col]) {
          throw ParseError("lower bound exceeds upper bound for '" +
                               tokens[2] + "'",
                           line_no);
        }
        break;
      }
      default:
        throw ParseError("data line outside a section", line_no);
    }
  }
  if (section != Section::kEnd) throw ParseError("missing ENDATA", line_no);
  for (RawRow& row : model.rows) {
    std::sort(row.terms.begin(), row.terms.end());
    for (std::size_t k = 1; k < row.terms.size(); ++k) {
      if (row.terms[k].first == row.terms[k - 1].first) {
        throw ParseError("duplicate entry in row '" + row.name + "'", 0);
      }
    }
  }
  try {
    return normalize(model);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 0);
  }
}

}  // namespace branchlab
