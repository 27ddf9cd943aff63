#pragma once

// Little-endian fixed-width stream helpers shared by the dataset and model
// writers. Layouts are byte-exact; see docs/formats.md.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "gridloc/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need swaps");

namespace gridloc::io {

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (!in) throw DataError("unexpected end of file");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

inline void write_magic(std::ostream& out, const char (&magic)[5]) {
  out.write(magic, 4);
}

inline void expect_magic(std::istream& in, const char (&magic)[5],
                         const char* what) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0)
    throw DataError(std::string("not a ") + what + " file (bad magic)");
}

}  // namespace gridloc::io
