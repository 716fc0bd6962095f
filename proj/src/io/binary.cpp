// Copyright 2026 The Glow Authors
// SPDX-License-Identifier: Apache-2.0

#include "glow/io/binary.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace glow {

std::string_view format_error_name(FormatErrorCode code) {
  switch (code) {
    case FormatErrorCode::kBadMagic: return "bad magic";
    case FormatErrorCode::kUnsupportedVersion: return "unsupported version";
    case FormatErrorCode::kBadHeader: return "bad header";
    case FormatErrorCode::kTruncated: return "truncated payload";
    case FormatErrorCode::kDescriptorWidthMismatch: return "descriptor width mismatch";
    case FormatErrorCode::kTrailingBytes: return "trailing bytes";
    case FormatErrorCode::kChecksumMismatch: return "checksum mismatch";
    case FormatErrorCode::kBadValue: return "bad value";
  }
  return "unknown";
}

FormatError::FormatError(FormatErrorCode code, std::size_t offset, const std::string& detail)
    : InvalidInput(std::string(format_error_name(code)) + " at byte " + std::to_string(offset) +
                   (detail.empty() ? "" : ": " + detail)),
      code_(code),
      offset_(offset) {}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename U>
void put(std::vector<std::uint8_t>& buf, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(std::uint8_t((v >> (8 * i)) & 0xFF));
}

template <typename U>
U get(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= U(p[i]) << (8 * i);
  return v;
}

}  // namespace

void ByteWriter::bytes(std::string_view raw) { buf_.insert(buf_.end(), raw.begin(), raw.end()); }
void ByteWriter::u32(std::uint32_t v) { put(buf_, v); }
void ByteWriter::u64(std::uint64_t v) { put(buf_, v); }
void ByteWriter::f32(float v) { put(buf_, std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { put(buf_, std::bit_cast<std::uint64_t>(v)); }

void ByteReader::need(std::size_t n) const {
  if (remaining() < n) {
    throw FormatError(FormatErrorCode::kTruncated, pos_,
                      "need " + std::to_string(n) + " bytes, " + std::to_string(remaining()) +
                          " left");
  }
}

std::string ByteReader::bytes(std::size_t n) {
  need(n);
  std::string out(reinterpret_cast<const char*>(data_.data() + pos_), n);
  pos_ += n;
  return out;
}

std::uint32_t ByteReader::u32() {
  need(4);
  auto v = get<std::uint32_t>(data_.data() + pos_);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  auto v = get<std::uint64_t>(data_.data() + pos_);
  pos_ += 8;
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::uint64_t fnv1a64(std::span<const std::uint8_t> data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace glow
