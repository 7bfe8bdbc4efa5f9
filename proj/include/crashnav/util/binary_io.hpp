#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>

namespace crashnav::util {

/// Raised by BinaryReader when the stream ends early.
class TruncatedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a, used for content hashes of archives and datasets.
class Fnv1a {
 public:
  void update(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
      h_ ^= b;
      h_ *= 0x100000001B3ULL;
    }
  }
  void update(const void* data, std::size_t n) {
    update(std::span<const std::uint8_t>(static_cast<const std::uint8_t*>(data), n));
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

std::string hex64(std::uint64_t v);

/// Little-endian primitive writer. Every byte written also feeds `hash`.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void bytes(const void* data, std::size_t n);
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f32(float v);
  void str(const std::string& s);  // u32 length + bytes
  void magic(const char (&tag)[5]) { bytes(tag, 4); }

  const Fnv1a& hash() const { return hash_; }

 private:
  std::ostream& out_;
  Fnv1a hash_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  void bytes(void* data, std::size_t n);
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  float f32();
  std::string str(std::size_t max_len = 1 << 20);
  /// Reads four bytes; returns true when they equal `tag`.
  bool magic(const char (&tag)[5]);
  bool at_eof();

  /// When set, every byte read afterwards is fed to `h`.
  void track(Fnv1a* h) { hash_ = h; }

 private:
  std::istream& in_;
  Fnv1a* hash_ = nullptr;
};

}  // namespace crashnav::util
