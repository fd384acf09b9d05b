#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

// Little-endian primitives shared by the WFC1/WFM1 containers.
namespace wfc::detail {

template <class UInt>
void put_le(std::ostream& os, UInt v) {
  char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(bytes, sizeof(UInt));
}

template <class UInt>
UInt get_le(std::istream& is, const char* what) {
  unsigned char bytes[sizeof(UInt)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(UInt)))
    throw std::runtime_error(std::string("truncated file while reading ") + what);
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& os, double x) { put_le(os, std::bit_cast<std::uint64_t>(x)); }
inline double get_f64(std::istream& is, const char* what) { return std::bit_cast<double>(get_le<std::uint64_t>(is, what)); }

inline void expect_magic(std::istream& is, const char (&magic)[5]) {
  char got[4];
  if (!is.read(got, 4) || std::string(got, 4) != std::string(magic, 4))
    throw std::runtime_error(std::string("bad magic: expected ") + magic);
}

inline void expect_eof(std::istream& is) {
  if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error("trailing bytes after payload");
}

}  // namespace wfc::detail
