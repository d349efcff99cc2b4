#pragma once
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "fft.hpp"
#include "grid.hpp"

namespace dcl {

// Complex scalar field sampled on a Grid.
struct Field {
  Grid grid;
  std::vector<cplx> a;
};

inline Field make_field(const Grid& g) { return Field{g, std::vector<cplx>(g.n)}; }

// Periodic trapezoid rule: integral of |f|^2 dx over one period.
inline double norm2(const Field& f) {
  double s = 0.0;
  for (const cplx& v : f.a) s += std::norm(v);
  return s * f.grid.h();
}

// Integral of conj(f) g dx; grids must coincide.
inline cplx inner(const Field& f, const Field& g) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < f.a.size(); ++i) s += std::conj(f.a[i]) * g.a[i];
  return s * f.grid.h();
}

inline double distance(const Field& f, const Field& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.a.size(); ++i) s += std::norm(f.a[i] - g.a[i]);
  return std::sqrt(s * f.grid.h());
}

inline cplx phase_factor(double ang) { return cplx(std::cos(ang), std::sin(ang)); }

// Unitary Fourier transform of a sampled field:
//   fhat(k_j) = (h/sqrt(2 pi)) e^{-i k_j xmin} sum_m f(x_m) e^{-2 pi i j m / n},
// which is the periodic trapezoid rule for (1/sqrt(2 pi)) int f(x) e^{-i k x} dx.
// Returned in DFT bin order (Grid::signed_index); sum_j |fhat_j|^2 dk equals
// norm2(f) exactly.
inline std::vector<cplx> forward_ft(const Field& f) {
  std::vector<cplx> s = f.a;
  dft(s);
  const double c = f.grid.h() / kSqrtTwoPi;
  for (std::size_t b = 0; b < s.size(); ++b) s[b] *= c * phase_factor(-f.grid.k(b) * f.grid.xmin);
  return s;
}

// Inverse of forward_ft: samples on g from a bin-ordered spectrum.
inline Field inverse_ft(const Grid& g, const std::vector<cplx>& spec) {
  Field f = make_field(g);
  for (std::size_t b = 0; b < g.n; ++b) f.a[b] = spec[b] * phase_factor(g.k(b) * g.xmin);
  idft(f.a);
  const double c = kSqrtTwoPi / g.h();
  for (cplx& v : f.a) v *= c;
  return f;
}

// Bin-ordered spectrum reordered to strictly ascending k (j = -n/2 .. n/2-1).
inline std::vector<cplx> to_ascending(const Grid& g, const std::vector<cplx>& bins) {
  std::vector<cplx> out(g.n);
  for (std::size_t b = 0; b < g.n; ++b)
    out[std::size_t(g.signed_index(b) + std::int64_t(g.n / 2))] = bins[b];
  return out;
}

inline std::vector<cplx> from_ascending(const Grid& g, const std::vector<cplx>& asc) {
  std::vector<cplx> bins(g.n);
  for (std::size_t b = 0; b < g.n; ++b)
    bins[b] = asc[std::size_t(g.signed_index(b) + std::int64_t(g.n / 2))];
  return bins;
}

// Field on the ascending momentum grid (values are the unitary transform).
inline Field momentum_field(const Field& f) {
  return Field{momentum_grid(f.grid), to_ascending(f.grid, forward_ft(f))};
}

} // namespace dcl
