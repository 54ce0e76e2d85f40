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
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "branchlab/milp.hpp"
#include "text_util.hpp"

namespace branchlab {

namespace {

enum class Block { kHeader, kVars, kObjective, kRow, kDone };

}  // namespace

MilpInstance parse_instance(std::string_view text) {
  RawModel model;
  std::unordered_map<std::string, int> columns;
  Block block = Block::kHeader;
  int line_no = 0;
  bool seen_objective = false;

  auto column_of = [&](const std::string& name) {
    auto it = columns.find(name);
    if (it == columns.end()) {
      throw ParseError("undeclared variable '" + name + "'", line_no);
    }
    return it->second;
  };

  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    const auto tokens = detail::tokenize(line);
    if (tokens.empty() || tokens[0][0] == '#') continue;
    if (block == Block::kDone) {
      throw ParseError("content after 'end'", line_no);
    }
    const std::string& head = tokens[0];

    if (block == Block::kHeader) {
      if (head != "milp" || tokens.size() != 3) {
        throw ParseError("expected 'milp <name> min|max'", line_no);
      }
      if (tokens[2] == "max") {
        model.maximize = true;
      } else if (tokens[2] != "min") {
        throw ParseError("objective sense must be min or max", line_no);
      }
      model.name = tokens[1];
      block = Block::kVars;
      continue;
    }

    if (head == "meta") {
      if (block != Block::kVars || tokens.size() < 2) {
        throw ParseError("misplaced or malformed 'meta' line", line_no);
      }
      model.metadata[tokens[1]] = detail::rest_after(line, 2);
    } else if (head == "var") {
      if (block != Block::kVars) {
        throw ParseError("'var' after objective or rows", line_no);
      }
      if (tokens.size() != 5) {
        throw ParseError("expected 'var <name> <lb> <ub> <int|cont>'",
                         line_no);
      }
      const double lb = detail::parse_number(tokens[2], line_no);
      const double ub = detail::parse_number(tokens[3], line_no);
      if (lb == kInf || ub == -kInf) {
        throw ParseError("bound points the wrong way", line_no);
      }
      if (lb > ub) {
        throw ParseError("lower bound exceeds upper bound for '" + tokens[1] +
                             "'",
                         line_no);
      }
      if (tokens[4] != "int" && tokens[4] != "cont") {
        throw ParseError("variable type must be int or cont", line_no);
      }
      if (!columns.emplace(tokens[1], static_cast<int>(model.c.size()))
               .second) {
        throw ParseError("duplicate variable '" + tokens[1] + "'", line_no);
      }
      model.var_names.push_back(tokens[1]);
      model.c.push_back(0.0);
      model.lower.push_back(lb);
      model.upper.push_back(ub);
      model.integer.push_back(tokens[4] == "int");
    } else if (head == "obj") {
      if (tokens.size() != 1 || seen_objective || block == Block::kRow) {
        throw ParseError("misplaced 'obj' block", line_no);
      }
      seen_objective = true;
      block = Block::kObjective;
    } else if (head == "row") {
      if (tokens.size() != 4) {
        throw ParseError("expected 'row <name> <=|>=|= <rhs>'", line_no);
      }
      RawRow row;
      row.name = tokens[1];
      if (tokens[2] == "<=") {
        row.sense = RowSense::kLe;
      } else if (tokens[2] == ">=") {
        row.sense = RowSense::kGe;
      } else if (tokens[2] == "=") {
        row.sense = RowSense::kEq;
      } else {
        throw ParseError("unknown row sense '" + tokens[2] + "'", line_no);
      }
      row.rhs = detail::parse_number(tokens[3], line_no);
      if (!std::isfinite(row.rhs)) throw ParseError("rhs must be finite", line_no);
      model.rows.push_back(std::move(row));
      block = Block::kRow;
    } else if (head == "end") {
      if (tokens.size() != 1) throw ParseError("malformed 'end'", line_no);
      block = Block::kDone;
    } else {
      // Term line "<coef> <var>" inside an obj or row block.
      if (tokens.size() != 2 ||
          (block != Block::kObjective && block != Block::kRow)) {
        throw ParseError("unexpected line '" + std::string(line) + "'",
                         line_no);
      }
      const double coef = detail::parse_number(tokens[0], line_no);
      if (!std::isfinite(coef)) {
        throw ParseError("coefficient must be finite", line_no);
      }
      const int col = column_of(tokens[1]);
      if (block == Block::kObjective) {
        model.c[col] += coef;
      } else {
        auto& terms = model.rows.back().terms;
        if (std::any_of(terms.begin(), terms.end(),
                        [&](const auto& t) { return t.first == col; })) {
          throw ParseError("variable '" + tokens[1] + "' repeated in row",
                           line_no);
        }
        terms.emplace_back(col, coef);
      }
    }
  }
  if (block == Block::kHeader) throw ParseError("empty document", 0);
  if (block != Block::kDone) throw ParseError("missing 'end'", line_no);
  try {
    return normalize(model);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), 0);
  }
}

std::string serialize_instance(const MilpInstance& instance) {
  const RawModel raw = to_raw(instance);
  std::ostringstream out;
  out << "milp " << raw.name << (raw.maximize ? " max" : " min") << '\n';
  for (const auto& [key, value] : raw.metadata) {
    out << "meta " << key << ' ' << value << '\n';
  }
  const int n = static_cast<int>(raw.c.size());
  for (int j = 0; j < n; ++j) {
    out << "var " << raw.var_names[j] << ' '
        << detail::format_number(raw.lower[j]) << ' '
        << detail::format_number(raw.upper[j]) << ' '
        << (raw.integer[j] ? "int" : "cont") << '\n';
  }
  out << "obj\n";
  for (int j = 0; j < n; ++j) {
    if (raw.c[j] != 0.0) {
      out << "  " << detail::format_number(raw.c[j]) << ' '
          << raw.var_names[j] << '\n';
    }
  }
  for (const RawRow& row : raw.rows) {
    out << "row " << row.name << " <= " << detail::format_number(row.rhs)
        << '\n';
    for (const auto& [col, coef] : row.terms) {
      out << "  " << detail::format_number(coef) << ' ' << raw.var_names[col]
          << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

MilpInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open instance file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".mps" ? parse_mps(buffer.str()) : parse_instance(buffer.str());
}

void save_instance(const MilpInstance& instance,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write instance file " + path.string());
  out << serialize_instance(instance);
}

std::vector<std::filesystem::path> list_instance_files(
    const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".milp" || ext == ".mps")) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::exists(path)) {
    files.push_back(path);
  } else {
    throw Error("instance path does not exist: " + path.string());
  }
  return files;
}

}  // namespace branchlab
