// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian byte packing shared by the GICK, AMAT and FSEQ containers.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "gi/errors.hpp"

namespace gi::io {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

class ByteWriter {
 public:
  void magic(std::string_view m) { out_.append(m); }
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void str(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void doubles(const double* p, std::size_t n) {
    out_.append(reinterpret_cast<const char*>(p), n * sizeof(double));
  }
  /// Appends the CRC32 of everything written so far and returns the bytes.
  std::string finish();

 private:
  std::string out_;
};

class ByteReader {
 public:
  /// Verifies the magic and the trailing CRC32 before any field is read.
  ByteReader(std::string_view bytes, std::string_view magic, const char* what);

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str();
  void doubles(double* p, std::size_t n);
  void expect_end();

 private:
  void need(std::size_t n);

  std::string_view data_;
  std::size_t pos_ = 0;
  const char* what_;
};

std::uint32_t crc32_of(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace gi::io
