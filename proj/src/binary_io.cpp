// Copyright (c) 2026, gan-introspect authors
// SPDX-License-Identifier: Apache-2.0

#include "binary_io.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>

namespace gi::io {

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string ByteWriter::finish() {
  put<std::uint32_t>(crc32_of(out_));
  return std::move(out_);
}

ByteReader::ByteReader(std::string_view bytes, std::string_view magic, const char* what)
    : what_(what) {
  if (bytes.size() < magic.size() + sizeof(std::uint32_t))
    throw FormatError(std::string(what) + ": file truncated");
  if (bytes.substr(0, magic.size()) != magic)
    throw FormatError(std::string(what) + ": bad magic");
  const std::string_view body = bytes.substr(0, bytes.size() - sizeof(std::uint32_t));
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof(stored));
  if (stored != crc32_of(body)) throw FormatError(std::string(what) + ": checksum mismatch");
  data_ = body;
  pos_ = magic.size();
}

void ByteReader::need(std::size_t n) {
  if (data_.size() - pos_ < n) throw FormatError(std::string(what_) + ": file truncated");
}

std::string ByteReader::str() {
  const auto n = get<std::uint32_t>();
  need(n);
  std::string s(data_.substr(pos_, n));
  pos_ += n;
  return s;
}

void ByteReader::doubles(double* p, std::size_t n) {
  if (n > (data_.size() - pos_) / sizeof(double))
    throw FormatError(std::string(what_) + ": file truncated");
  std::memcpy(p, data_.data() + pos_, n * sizeof(double));
  pos_ += n * sizeof(double);
}

void ByteReader::expect_end() {
  if (pos_ != data_.size()) throw FormatError(std::string(what_) + ": trailing bytes");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace gi::io
