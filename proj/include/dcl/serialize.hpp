#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dcl/complex_field.hpp"
#include "dcl/errors.hpp"
#include "dcl/field2d.hpp"
#include "dcl/grid.hpp"

namespace dcl {

// Binary field container: a 64-byte header (magic "DCL1", version, grid
// bounds and counts, little-endian) followed by interleaved (re, im) 64-bit
// floats in row-major order.  A 1D field stores ny = 0.
namespace detail {

static_assert(std::endian::native == std::endian::little,
              "field container assumes a little-endian host");

struct DumpHeader {
  double x_lo = 0.0, x_hi = 0.0;
  std::uint64_t nx = 0;
  double y_lo = 0.0, y_hi = 0.0;
  std::uint64_t ny = 0;
};

inline std::array<unsigned char, 64> pack_header(const DumpHeader& h) {
  std::array<unsigned char, 64> b{};
  std::memcpy(b.data(), "DCL1", 4);
  const std::uint32_t version = 1;
  std::memcpy(b.data() + 4, &version, 4);
  std::memcpy(b.data() + 8, &h.x_lo, 8);
  std::memcpy(b.data() + 16, &h.x_hi, 8);
  std::memcpy(b.data() + 24, &h.nx, 8);
  std::memcpy(b.data() + 32, &h.y_lo, 8);
  std::memcpy(b.data() + 40, &h.y_hi, 8);
  std::memcpy(b.data() + 48, &h.ny, 8);
  return b;
}

inline DumpHeader read_header(std::ifstream& in, const std::string& path) {
  std::array<unsigned char, 64> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size()))
    throw config_error("field read: truncated header in " + path);
  if (std::memcmp(b.data(), "DCL1", 4) != 0)
    throw config_error("field read: bad magic in " + path);
  std::uint32_t version = 0;
  std::memcpy(&version, b.data() + 4, 4);
  if (version != 1)
    throw config_error("field read: unsupported version in " + path);
  DumpHeader h;
  std::memcpy(&h.x_lo, b.data() + 8, 8);
  std::memcpy(&h.x_hi, b.data() + 16, 8);
  std::memcpy(&h.nx, b.data() + 24, 8);
  std::memcpy(&h.y_lo, b.data() + 32, 8);
  std::memcpy(&h.y_hi, b.data() + 40, 8);
  std::memcpy(&h.ny, b.data() + 48, 8);
  return h;
}

inline void write_payload(std::ofstream& out, const std::vector<cplx>& a,
                          const std::string& path) {
  static_assert(sizeof(cplx) == 16, "std::complex<double> must be two packed doubles");
  out.write(reinterpret_cast<const char*>(a.data()),
            std::streamsize(a.size() * sizeof(cplx)));
  if (!out) throw config_error("field write: I/O failure on " + path);
}

inline std::vector<cplx> read_payload(std::ifstream& in, std::size_t count,
                                      const std::string& path) {
  std::vector<cplx> a(count);
  if (!in.read(reinterpret_cast<char*>(a.data()), std::streamsize(count * sizeof(cplx))))
    throw config_error("field read: truncated payload in " + path);
  return a;
}

} // namespace detail

inline void write_field(const std::string& path, const Field& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("field write: cannot open " + path);
  detail::DumpHeader h;
  h.x_lo = f.grid.xmin;
  h.x_hi = f.grid.xmax;
  h.nx = f.grid.n;
  const auto header = detail::pack_header(h);
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  detail::write_payload(out, f.a, path);
}

inline void write_field(const std::string& path, const Field2D& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("field write: cannot open " + path);
  detail::DumpHeader h;
  h.x_lo = f.gx.xmin;
  h.x_hi = f.gx.xmax;
  h.nx = f.gx.n;
  h.y_lo = f.gy.xmin;
  h.y_hi = f.gy.xmax;
  h.ny = f.gy.n;
  const auto header = detail::pack_header(h);
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  detail::write_payload(out, f.a, path);
}

inline Field read_field_1d(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("field read: cannot open " + path);
  const detail::DumpHeader h = detail::read_header(in, path);
  if (h.ny != 0) throw config_error("field read: " + path + " holds a 2D field");
  Field f{make_grid(h.x_lo, h.x_hi, h.nx), {}};
  f.a = detail::read_payload(in, h.nx, path);
  return f;
}

inline Field2D read_field_2d(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("field read: cannot open " + path);
  const detail::DumpHeader h = detail::read_header(in, path);
  if (h.ny == 0) throw config_error("field read: " + path + " holds a 1D field");
  Field2D f{make_grid(h.x_lo, h.x_hi, h.nx), make_grid(h.y_lo, h.y_hi, h.ny), {}};
  f.a = detail::read_payload(in, h.nx * h.ny, path);
  return f;
}

// Plain-text export of a 1D field: one "x, re, im" line per sample.
inline void write_field_csv(const std::string& path, const Field& f) {
  std::ofstream out(path);
  if (!out) throw config_error("field write: cannot open " + path);
  char buf[96];
  out << "x,re,im\n";
  for (std::size_t i = 0; i < f.grid.n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", f.grid.x(i), f.a[i].real(),
                  f.a[i].imag());
    out << buf;
  }
  if (!out) throw config_error("field write: I/O failure on " + path);
}

} // namespace dcl
