// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian primitives for the binary file formats. All multi-byte values
// are serialized byte-by-byte so files are identical regardless of host
// endianness.

#ifndef PARTMAT_BINIO_HPP_
#define PARTMAT_BINIO_HPP_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "partmat/errors.hpp"

namespace partmat::binio {

inline void write_bytes(std::ostream& out, const void* data, size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

inline void read_exact(std::istream& in, void* data, size_t n,
                       const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    throw IoError(IoError::Code::kTruncated,
                  std::string("truncated stream while reading ") + what);
  }
}

inline void write_u8(std::ostream& out, uint8_t v) { write_bytes(out, &v, 1); }

inline void write_u16(std::ostream& out, uint16_t v) {
  const uint8_t b[2] = {static_cast<uint8_t>(v & 0xff),
                        static_cast<uint8_t>(v >> 8)};
  write_bytes(out, b, 2);
}

inline void write_u32(std::ostream& out, uint32_t v) {
  uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
  write_bytes(out, b, 4);
}

inline void write_u64(std::ostream& out, uint64_t v) {
  uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
  write_bytes(out, b, 8);
}

inline void write_f32(std::ostream& out, float v) {
  write_u32(out, std::bit_cast<uint32_t>(v));
}

inline uint8_t read_u8(std::istream& in, const char* what = "u8") {
  uint8_t v;
  read_exact(in, &v, 1, what);
  return v;
}

inline uint16_t read_u16(std::istream& in, const char* what = "u16") {
  uint8_t b[2];
  read_exact(in, b, 2, what);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

inline uint32_t read_u32(std::istream& in, const char* what = "u32") {
  uint8_t b[4];
  read_exact(in, b, 4, what);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

inline uint64_t read_u64(std::istream& in, const char* what = "u64") {
  uint8_t b[8];
  read_exact(in, b, 8, what);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

inline float read_f32(std::istream& in, const char* what = "f32") {
  return std::bit_cast<float>(read_u32(in, what));
}

/// u16 length prefix + UTF-8 bytes.
inline void write_string16(std::ostream& out, std::string_view s) {
  if (s.size() > UINT16_MAX) {
    throw InvalidArgument("string too long for u16 length prefix");
  }
  write_u16(out, static_cast<uint16_t>(s.size()));
  write_bytes(out, s.data(), s.size());
}

inline std::string read_string16(std::istream& in,
                                 const char* what = "string") {
  const uint16_t len = read_u16(in, what);
  std::string s(len, '\0');
  if (len > 0) read_exact(in, s.data(), len, what);
  return s;
}

/// Fixed 4-byte magic, written without a length prefix.
inline void write_magic(std::ostream& out, const char magic[4]) {
  write_bytes(out, magic, 4);
}

inline void expect_magic(std::istream& in, const char magic[4],
                         const char* format_name) {
  char b[4];
  read_exact(in, b, 4, "magic");
  if (b[0] != magic[0] || b[1] != magic[1] || b[2] != magic[2] ||
      b[3] != magic[3]) {
    throw IoError(IoError::Code::kBadMagic,
                  std::string("bad magic for ") + format_name + " file");
  }
}

}  // namespace partmat::binio

#endif  // PARTMAT_BINIO_HPP_
