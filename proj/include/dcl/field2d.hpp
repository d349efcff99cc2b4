#pragma once
#include <cmath>
#include <cstddef>
#include <vector>

#include "complex_field.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace dcl {

// Complex field on the tensor grid gx x gy, row-major: a[ix * gy.n + iy].
struct Field2D {
  Grid gx, gy;
  std::vector<cplx> a;

  double cell() const { return gx.h() * gy.h(); }
  cplx& at(std::size_t ix, std::size_t iy) { return a[ix * gy.n + iy]; }
  const cplx& at(std::size_t ix, std::size_t iy) const { return a[ix * gy.n + iy]; }
};

inline Field2D make_field2d(const Grid& gx, const Grid& gy) {
  return Field2D{gx, gy, std::vector<cplx>(gx.n * gy.n)};
}

inline bool same_grids(const Field2D& f, const Field2D& g) {
  return f.gx.n == g.gx.n && f.gx.xmin == g.gx.xmin && f.gx.xmax == g.gx.xmax &&
         f.gy.n == g.gy.n && f.gy.xmin == g.gy.xmin && f.gy.xmax == g.gy.xmax;
}

inline double norm2(const Field2D& f) {
  double s = 0.0;
  for (const cplx& v : f.a) s += std::norm(v);
  return s * f.cell();
}

inline cplx inner(const Field2D& f, const Field2D& g) {
  if (!same_grids(f, g)) throw config_error("Field2D inner: grids do not match");
  cplx s = 0.0;
  for (std::size_t i = 0; i < f.a.size(); ++i) s += std::conj(f.a[i]) * g.a[i];
  return s * f.cell();
}

inline double distance(const Field2D& f, const Field2D& g) {
  if (!same_grids(f, g)) throw config_error("Field2D distance: grids do not match");
  double s = 0.0;
  for (std::size_t i = 0; i < f.a.size(); ++i) s += std::norm(f.a[i] - g.a[i]);
  return std::sqrt(s * f.cell());
}

// Mass inside the outermost `cells` rows/columns of the box (escape monitor).
inline double boundary_mass(const Field2D& f, std::size_t cells) {
  double s = 0.0;
  const std::size_t nx = f.gx.n, ny = f.gy.n;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const bool edge_x = ix < cells || ix + cells >= nx;
    for (std::size_t iy = 0; iy < ny; ++iy) {
      if (edge_x || iy < cells || iy + cells >= ny) s += std::norm(f.at(ix, iy));
    }
  }
  return s * f.cell();
}

} // namespace dcl
