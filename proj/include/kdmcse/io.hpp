#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "kdmcse/errors.hpp"

namespace kdmcse {

/// Fixed float formatting for every CSV/report surface: 9 significant
/// digits, so reruns diff cleanly.
inline std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoError, "read failed: " + path.string());
  return data;
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

// Little-endian packing helpers. Byte order is explicit so files are
// identical regardless of host endianness.

inline void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32le(std::string& out, float v) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &v, 4);
  put_u32le(out, bits);
}

/// Bounds-checked cursor over an in-memory file image.
class ByteReader {
 public:
  ByteReader(const std::string& buffer, std::string origin)
      : buf_(buffer), origin_(std::move(origin)) {}

  std::uint16_t u16() {
    need(2);
    const auto* p = reinterpret_cast<const unsigned char*>(buf_.data() + pos_);
    pos_ += 2;
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }

  std::uint32_t u32() {
    need(4);
    const auto* p = reinterpret_cast<const unsigned char*>(buf_.data() + pos_);
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }

  float f32() {
    const std::uint32_t bits = u32();
    float v = 0.0f;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return buf_.size() - pos_; }

  void expect_exhausted() const {
    if (pos_ != buf_.size()) {
      fail(ErrorCode::MalformedFile, origin_ + ": trailing bytes after payload");
    }
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) {
      fail(ErrorCode::MalformedFile, origin_ + ": truncated file");
    }
  }

  const std::string& buf_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace kdmcse
