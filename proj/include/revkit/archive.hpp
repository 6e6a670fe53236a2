// revkit/archive.hpp

// Copyright 2026  RevKit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Binary matrix archive: magic "RVK1", u32 rows, u32 cols, u8 dtype
// (0 = f32, 1 = u32), little-endian row-major payload.

#ifndef REVKIT_ARCHIVE_HPP_
#define REVKIT_ARCHIVE_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "revkit/common.hpp"

namespace revkit {

struct FloatMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;  // row-major

  float& at(std::uint32_t r, std::uint32_t c) { return data[r * cols + c]; }
  float at(std::uint32_t r, std::uint32_t c) const { return data[r * cols + c]; }
  const float* row(std::uint32_t r) const { return data.data() + r * cols; }
  float* row(std::uint32_t r) { return data.data() + r * cols; }
};

namespace detail {

constexpr char kArchiveMagic[4] = {'R', 'V', 'K', '1'};

inline void put_u32le(std::ostream& os, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

inline std::uint32_t read_u32le(std::istream& is, const std::string& path) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  require(is.good(), "archive: truncated header in '", path, "'");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

template <typename T>
void write_archive_impl(const std::string& path, std::uint32_t rows,
                        std::uint32_t cols, std::uint8_t dtype,
                        const std::vector<T>& data) {
  require(data.size() == static_cast<std::size_t>(rows) * cols,
          "archive: payload size mismatch for '", path, "'");
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "archive: cannot open '", path, "' for writing");
  os.write(kArchiveMagic, 4);
  put_u32le(os, rows);
  put_u32le(os, cols);
  os.put(static_cast<char>(dtype));
  for (const T& v : data) {
    char b[4];
    std::memcpy(b, &v, 4);
    os.write(b, 4);  // host is little-endian on every supported target
  }
  require(os.good(), "archive: write failed for '", path, "'");
}

template <typename T>
void read_archive_impl(const std::string& path, std::uint8_t expected_dtype,
                       std::uint32_t* rows, std::uint32_t* cols,
                       std::vector<T>* data) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "archive: cannot open '", path, "'");
  char magic[4];
  is.read(magic, 4);
  require(is.good() && std::memcmp(magic, kArchiveMagic, 4) == 0,
          "archive: '", path, "' has bad magic");
  *rows = read_u32le(is, path);
  *cols = read_u32le(is, path);
  int dtype = is.get();
  require(dtype != EOF, "archive: truncated header in '", path, "'");
  require(dtype == expected_dtype, "archive: '", path, "' has dtype ", dtype,
          ", expected ", static_cast<int>(expected_dtype));
  std::size_t n = static_cast<std::size_t>(*rows) * *cols;
  data->resize(n);
  is.read(reinterpret_cast<char*>(data->data()),
          static_cast<std::streamsize>(n * 4));
  require(is.gcount() == static_cast<std::streamsize>(n * 4),
          "archive: truncated payload in '", path, "'");
}

}  // namespace detail

inline void write_float_archive(const FloatMatrix& m, const std::string& path) {
  detail::write_archive_impl(path, m.rows, m.cols, 0, m.data);
}

inline FloatMatrix read_float_archive(const std::string& path) {
  FloatMatrix m;
  detail::read_archive_impl(path, 0, &m.rows, &m.cols, &m.data);
  return m;
}

// Labels and other index sequences are stored as an N x 1 u32 matrix.
inline void write_u32_archive(const std::vector<std::uint32_t>& v,
                              const std::string& path) {
  detail::write_archive_impl(path, static_cast<std::uint32_t>(v.size()), 1, 1,
                             v);
}

inline std::vector<std::uint32_t> read_u32_archive(const std::string& path) {
  std::uint32_t rows = 0, cols = 0;
  std::vector<std::uint32_t> v;
  detail::read_archive_impl(path, 1, &rows, &cols, &v);
  require(cols == 1, "archive: '", path, "' expected single column, got ",
          cols);
  return v;
}

}  // namespace revkit

#endif  // REVKIT_ARCHIVE_HPP_
