// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GLOW_IO_BINARY_HPP_
#define GLOW_IO_BINARY_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "glow/num/matrix.hpp"

namespace glow {

enum class FormatErrorCode {
  kBadMagic,
  kUnsupportedVersion,
  kBadHeader,
  kTruncated,
  kDescriptorWidthMismatch,
  kTrailingBytes,
  kChecksumMismatch,
  kBadValue,
};

std::string_view format_error_name(FormatErrorCode code);

/// Parse failure in one of the binary containers; names the byte offset at
/// which decoding stopped.
class FormatError : public InvalidInput {
 public:
  FormatError(FormatErrorCode code, std::size_t offset, const std::string& detail);
  FormatErrorCode code() const { return code_; }
  std::size_t offset() const { return offset_; }

 private:
  FormatErrorCode code_;
  std::size_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Little-endian encoder.
class ByteWriter {
 public:
  void bytes(std::string_view raw);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  std::size_t size() const { return buf_.size(); }
  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

/// Little-endian decoder that throws kTruncated with the current offset.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}
  std::string bytes(std::size_t n);
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> data);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace glow

#endif  // GLOW_IO_BINARY_HPP_
