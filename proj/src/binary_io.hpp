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


// Little-endian byte packing shared by the dataset and model files.

#ifndef BRANCHLAB_SRC_BINARY_IO_HPP_
#define BRANCHLAB_SRC_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>

#include "branchlab/common.hpp"

namespace branchlab::binio {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&value);
    bytes_.append(p, sizeof(T));
  }
  void put_bytes(const std::string& s) {
    put<std::uint64_t>(s.size());
    bytes_ += s;
  }
  template <typename T>
  void put_array(const T* data, std::size_t count) {
    bytes_.append(reinterpret_cast<const char*>(data), count * sizeof(T));
  }
  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t pos = 0, std::size_t end = std::string::npos)
      : bytes_(bytes), pos_(pos), end_(end == std::string::npos ? bytes.size() : end) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_bytes() {
    const auto size = get<std::uint64_t>();
    need(size);
    std::string s = bytes_.substr(pos_, size);
    pos_ += size;
    return s;
  }
  template <typename T>
  void get_array(T* data, std::size_t count) {
    if (count > (end_ - pos_) / sizeof(T)) throw FormatError("truncated file");
    std::memcpy(data, bytes_.data() + pos_, count * sizeof(T));
    pos_ += count * sizeof(T);
  }
  void need(std::uint64_t size) const {
    if (size > end_ - pos_) throw FormatError("truncated file");
  }
  void skip(std::uint64_t size) {
    need(size);
    pos_ += size;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == end_; }

 private:
  const std::string& bytes_;
  std::size_t pos_;
  std::size_t end_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace branchlab::binio

#endif  // BRANCHLAB_SRC_BINARY_IO_HPP_
