#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "hdd/error.hpp"

// Little-endian scalar I/O shared by the grid and checkpoint formats.
namespace hdd::binio {

static_assert(std::endian::native == std::endian::little, "binio assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw ParseError(ParseErrorKind::kTruncated, std::string("unexpected end of data reading ") + what);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

inline std::string get_bytes(std::istream& in, std::size_t n, const char* what) {
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n))
    throw ParseError(ParseErrorKind::kTruncated, std::string("unexpected end of data reading ") + what);
  return s;
}

}  // namespace hdd::binio
