#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexrisk/error.hpp"

namespace lexrisk::io {

// Little-endian container primitives shared by the model and classifier files.

class BinaryWriter {
 public:
  void bytes(std::string_view raw) { out_.append(raw); }

  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void str(std::string_view s) {
    u64(s.size());
    out_.append(s);
  }

  void f32s(std::span<const float> values) {
    u64(values.size());
    for (float v : values) f32(v);
  }

  void f64s(std::span<const double> values) {
    u64(values.size());
    for (double v : values) f64(v);
  }

  const std::string& data() const& { return out_; }
  std::string data() && { return std::move(out_); }

 private:
  std::string out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::string_view in) : in_(in) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto v = in_.substr(pos_, n);
    pos_ += n;
    return v;
  }

  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }

  std::uint32_t u32() {
    auto b = bytes(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }

  std::uint64_t u64() {
    auto b = bytes(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
  }

  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  std::string str() {
    const auto n = length(1);
    return std::string(bytes(n));
  }

  std::vector<float> f32s() {
    std::vector<float> v(length(4));
    for (auto& x : v) x = f32();
    return v;
  }

  std::vector<double> f64s() {
    std::vector<double> v(length(8));
    for (auto& x : v) x = f64();
    return v;
  }

  // Element count prefix, bounded by what is left in the buffer.
  std::size_t length(std::size_t element_size) {
    const auto n = u64();
    if (n > (in_.size() - pos_) / element_size)
      fail(ErrorCode::bad_format, "truncated container: length prefix exceeds payload");
    return static_cast<std::size_t>(n);
  }

  void expect_magic(std::string_view magic) {
    if (bytes(magic.size()) != magic) fail(ErrorCode::bad_format, "bad magic bytes");
  }

  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail(ErrorCode::bad_format, "truncated container");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace lexrisk::io
