#include "crashnav/util/binary_io.hpp"

#include <bit>
#include <cstdio>

namespace crashnav::util {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void BinaryWriter::bytes(const void* data, std::size_t n) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out_) throw std::runtime_error("write failed");
  hash_.update(data, n);
}

void BinaryWriter::u16(std::uint16_t v) { bytes(&v, sizeof v); }
void BinaryWriter::u32(std::uint32_t v) { bytes(&v, sizeof v); }
void BinaryWriter::u64(std::uint64_t v) { bytes(&v, sizeof v); }
void BinaryWriter::f64(double v) { bytes(&v, sizeof v); }
void BinaryWriter::f32(float v) { bytes(&v, sizeof v); }

void BinaryWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s.data(), s.size());
}

void BinaryReader::bytes(void* data, std::size_t n) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) throw TruncatedError("unexpected end of data (truncated file)");
  if (hash_) hash_->update(data, n);
}

std::uint8_t BinaryReader::u8() {
  std::uint8_t v;
  bytes(&v, 1);
  return v;
}

std::uint16_t BinaryReader::u16() {
  std::uint16_t v;
  bytes(&v, sizeof v);
  return v;
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t v;
  bytes(&v, sizeof v);
  return v;
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v;
  bytes(&v, sizeof v);
  return v;
}

double BinaryReader::f64() {
  double v;
  bytes(&v, sizeof v);
  return v;
}

float BinaryReader::f32() {
  float v;
  bytes(&v, sizeof v);
  return v;
}

std::string BinaryReader::str(std::size_t max_len) {
  const std::uint32_t n = u32();
  if (n > max_len) throw std::runtime_error("string length " + std::to_string(n) + " exceeds limit");
  std::string s(n, '\0');
  bytes(s.data(), n);
  return s;
}

bool BinaryReader::magic(const char (&tag)[5]) {
  char buf[4];
  bytes(buf, 4);
  return std::memcmp(buf, tag, 4) == 0;
}

bool BinaryReader::at_eof() { return in_.peek() == std::char_traits<char>::eof(); }

}  // namespace crashnav::util
