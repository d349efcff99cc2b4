#pragma once
#include <cstddef>
#include <cstdint>

#include "errors.hpp"
#include "fft.hpp"

namespace dcl {

// Uniform periodic sample grid on [xmin, xmax): n samples, spacing h.
// Its momentum companion carries k_j = j*dk, dk = 2*pi/(n h).  DFT bin b holds
// the signed index j = b for b < n/2 and j = b - n otherwise; the Nyquist bin
// b = n/2 is assigned j = -n/2.
struct Grid {
  double xmin = 0.0;
  double xmax = 0.0;
  std::size_t n = 0;

  double extent() const { return xmax - xmin; }
  double h() const { return extent() / double(n); }
  double x(std::size_t i) const { return xmin + double(i) * h(); }
  double dk() const { return kTwoPi / extent(); }
  std::int64_t signed_index(std::size_t bin) const {
    return bin < n / 2 ? std::int64_t(bin) : std::int64_t(bin) - std::int64_t(n);
  }
  double k(std::size_t bin) const { return double(signed_index(bin)) * dk(); }
  double kmax() const { return double(n / 2) * dk(); }
  // Bin holding -k(bin); the Nyquist bin is its own mirror on this periodic lattice.
  std::size_t mirror_bin(std::size_t bin) const { return bin == 0 ? 0 : n - bin; }
  // Index of the sample at coordinate value v, if v is on the grid.
  bool contains_index_of(double v) const {
    double u = (v - xmin) / h();
    double r = u - double(std::int64_t(u + 0.5));
    return u > -0.5 && u < double(n) - 0.5 && (r < 1e-9 && r > -1e-9);
  }
  std::size_t index_of(double v) const { return std::size_t((v - xmin) / h() + 0.5); }
};

inline Grid make_grid(double xmin, double xmax, std::size_t n) {
  if (!(xmax > xmin)) throw config_error("grid: xmax must exceed xmin");
  if (n == 0 || (n & (n - 1)) != 0)
    throw config_error("grid: n must be a power of two, got " + std::to_string(n));
  return Grid{xmin, xmax, n};
}

// Symmetric grid [-half, half) with the origin exactly on a sample point.
inline Grid make_symmetric_grid(double half, std::size_t n) {
  return make_grid(-half, half, n);
}

// Momentum grid matching Grid's ascending-k order: [-n/2*dk, +n/2*dk).
inline Grid momentum_grid(const Grid& g) {
  const double kmin = -double(g.n / 2) * g.dk();
  return Grid{kmin, kmin + double(g.n) * g.dk(), g.n};
}

} // namespace dcl
