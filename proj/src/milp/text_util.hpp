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

#ifndef BRANCHLAB_SRC_MILP_TEXT_UTIL_HPP_
#define BRANCHLAB_SRC_MILP_TEXT_UTIL_HPP_

#include <cctype>
#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "branchlab/common.hpp"

namespace branchlab::detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    const std::size_t start = i;
    while (i < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  return tokens;
}

// Text following the first `skip` tokens, with surrounding blanks removed.
inline std::string rest_after(std::string_view line, int skip) {
  std::size_t i = 0;
  for (int t = 0; t < skip; ++t) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    while (i < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
  }
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
    ++i;
  std::size_t end = line.size();
  while (end > i && std::isspace(static_cast<unsigned char>(line[end - 1])))
    --end;
  return std::string(line.substr(i, end - i));
}

inline double parse_number(const std::string& token, int line_no) {
  if (token == "+inf" || token == "inf" || token == "Inf" ||
      token == "+Inf" || token == "infinity") {
    return kInf;
  }
  if (token == "-inf" || token == "-Inf" || token == "-infinity") {
    return -kInf;
  }
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("invalid number '" + token + "'", line_no);
  }
  return value;
}

inline std::string format_number(double value) {
  if (value == kInf) return "+inf";
  if (value == -kInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace branchlab::detail

#endif  // BRANCHLAB_SRC_MILP_TEXT_UTIL_HPP_
