#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "chirp.hpp"
#include "complex_field.hpp"
#include "errors.hpp"
#include "field2d.hpp"
#include "grid.hpp"
#include "packet.hpp"
#include "parallel.hpp"

namespace dcl {

// Reduced state of the heavy particle: kernel samples rho(R_i, R_j) on a
// uniform grid, row-major.  Continuum-kernel conventions throughout: the
// trace is h * (diagonal sum) and operator eigenvalues are h * (matrix
// spectrum), so a unit-norm state has trace 1 and spectrum summing to 1.
struct ReducedDensityMatrix {
  Grid g;
  std::vector<cplx> a; // g.n x g.n

  std::size_t n() const { return g.n; }
  cplx& at(std::size_t i, std::size_t j) { return a[i * g.n + j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return a[i * g.n + j]; }
};

// Explicit matrices are quadratic in the heavy grid; larger grids must go
// through the streaming position_density path instead.
inline constexpr std::size_t kDensityMatrixCap = 4096;

inline ReducedDensityMatrix make_density_matrix(const Grid& g) {
  if (g.n == 0) throw config_error("density matrix: empty heavy grid");
  if (g.n > kDensityMatrixCap)
    throw config_error("density matrix: heavy grid exceeds the explicit-matrix cap");
  return ReducedDensityMatrix{g, std::vector<cplx>(g.n * g.n)};
}

// rho(R, R') = int dr psi(R, r) conj(psi(R', r)) for a field carrying the
// heavy coordinate on gx and the light coordinate on gy.  Every entry is an
// independent fixed-order sum over the light grid, so the result is
// bit-identical for every worker count; Hermiticity is exact by mirroring.
inline ReducedDensityMatrix partial_trace_light(const Field2D& psi, std::size_t workers = 1) {
  for (const cplx& v : psi.a)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw config_error("partial trace: field has non-finite entries");
  auto rho = make_density_matrix(psi.gx);
  const std::size_t n = psi.gx.n, m = psi.gy.n;
  const double hr = psi.gy.h();
  parallel_for(n, workers, [&](std::size_t i) {
    const cplx* ri = &psi.a[i * m];
    for (std::size_t j = i; j < n; ++j) {
      const cplx* rj = &psi.a[j * m];
      cplx s = 0.0;
      for (std::size_t q = 0; q < m; ++q) s += ri[q] * std::conj(rj[q]);
      s *= hr;
      rho.at(i, j) = s;
      if (j != i) rho.at(j, i) = std::conj(s);
    }
  });
  return rho;
}

// n(R) = int dr |psi(R, r)|^2 without forming the matrix: the streaming path,
// valid for heavy grids of any size.
struct HeavyDensityProfile {
  Grid g;
  std::vector<double> n;
};

inline HeavyDensityProfile position_density(const Field2D& psi, std::size_t workers = 1) {
  HeavyDensityProfile prof{psi.gx, std::vector<double>(psi.gx.n)};
  const std::size_t m = psi.gy.n;
  const double hr = psi.gy.h();
  parallel_for(psi.gx.n, workers, [&](std::size_t i) {
    const cplx* ri = &psi.a[i * m];
    double s = 0.0;
    for (std::size_t q = 0; q < m; ++q) s += std::norm(ri[q]);
    prof.n[i] = s * hr;
  });
  return prof;
}

inline cplx matrix_trace(const ReducedDensityMatrix& rho) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < rho.n(); ++i) s += rho.at(i, i);
  return s * rho.g.h();
}

inline double trace_defect(const ReducedDensityMatrix& rho) {
  return std::abs(matrix_trace(rho) - cplx(1.0));
}

inline double hermiticity_defect(const ReducedDensityMatrix& rho) {
  double worst = 0.0;
  for (std::size_t i = 0; i < rho.n(); ++i)
    for (std::size_t j = i; j < rho.n(); ++j)
      worst = std::max(worst, std::abs(rho.at(i, j) - std::conj(rho.at(j, i))));
  return worst;
}

// Tr rho^2; equals 1 exactly for a projector onto a unit-norm state.
inline double purity(const ReducedDensityMatrix& rho) {
  double s = 0.0;
  for (const cplx& v : rho.a) s += std::norm(v);
  return s * rho.g.h() * rho.g.h();
}

namespace detail {

// In-place lower Cholesky attempt; true iff the Hermitian matrix is strictly
// positive definite.  Only the lower triangle is referenced.
inline bool cholesky_pd(std::vector<cplx>& m, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = m[j * n + j].real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(m[j * n + k]);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    m[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx v = m[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= m[i * n + k] * std::conj(m[j * n + k]);
      m[i * n + j] = v / ljj;
    }
  }
  return true;
}

// Cyclic complex Jacobi eigenvalues of a Hermitian matrix (matrix units,
// ascending).  O(n^3) per sweep -- intended for modest n.
inline std::vector<double> hermitian_eigenvalues(std::vector<cplx> m, std::size_t n) {
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag = std::max(diag, std::fabs(m[p * n + p].real()));
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(m[p * n + q]));
    }
    const double scale = std::max(diag, 1e-300);
    if (off <= 1e-14 * scale) {
      std::vector<double> ev(n);
      for (std::size_t i = 0; i < n; ++i) ev[i] = m[i * n + i].real();
      std::sort(ev.begin(), ev.end());
      return ev;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = m[p * n + q];
        const double b = std::abs(apq);
        if (b <= 1e-18 * scale) continue;
        const cplx u = apq / b; // unimodular phase of the pivot
        const double app = m[p * n + p].real(), aqq = m[q * n + q].real();
        const double tau = (aqq - app) / (2.0 * b);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // similarity by V: V_pp = c, V_pq = s, V_qp = -s conj(u), V_qq = c conj(u)
        const cplx ub = std::conj(u);
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const cplx akp = m[k * n + p], akq = m[k * n + q];
          m[k * n + p] = c * akp - s * ub * akq;
          m[k * n + q] = s * akp + c * ub * akq;
          m[p * n + k] = std::conj(m[k * n + p]);
          m[q * n + k] = std::conj(m[k * n + q]);
        }
        m[p * n + p] = app - t * b;
        m[q * n + q] = aqq + t * b;
        m[p * n + q] = 0.0;
        m[q * n + p] = 0.0;
      }
    }
  }
  throw numerical_guard("eigenvalue iteration did not converge");
}

} // namespace detail

// Smallest operator eigenvalue, certified by shifted-Cholesky bisection to
// absolute accuracy tol.  Cost: one O(n^3/3) factorization attempt per
// bisection step, no spectral transforms.
inline double min_eigenvalue(const ReducedDensityMatrix& rho, double tol = 1e-10) {
  const std::size_t n = rho.n();
  if (n == 0) throw config_error("min eigenvalue: empty matrix");
  const double h = rho.g.h();
  double lo = std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) radius += std::abs(rho.at(i, j));
    const double d = rho.at(i, i).real();
    lo = std::min(lo, h * (d - radius));
    hi = std::min(hi, h * d);
  }
  lo -= tol;
  hi += tol;
  std::vector<cplx> work;
  while (hi - lo > tol) {
    const double s = 0.5 * (lo + hi);
    work = rho.a;
    const double shift = s / h;
    for (std::size_t i = 0; i < n; ++i) work[i * n + i] -= shift;
    if (detail::cholesky_pd(work, n))
      lo = s; // spectrum strictly above s
    else
      hi = s;
  }
  return 0.5 * (lo + hi);
}

// Full operator spectrum (ascending); dense Jacobi, capped well below the
// matrix cap because of its O(n^3 * sweeps) cost.
inline std::vector<double> operator_spectrum(const ReducedDensityMatrix& rho) {
  if (rho.n() > 1024) throw config_error("spectrum: dense eigensolve capped at 1024 points");
  auto ev = detail::hermitian_eigenvalues(rho.a, rho.n());
  for (double& v : ev) v *= rho.g.h();
  return ev;
}

// Trace norm = sum |operator eigenvalues|.
inline double trace_norm(const ReducedDensityMatrix& rho) {
  double s = 0.0;
  for (double v : operator_spectrum(rho)) s += std::fabs(v);
  return s;
}

inline double trace_norm_distance(const ReducedDensityMatrix& x, const ReducedDensityMatrix& y) {
  if (x.n() != y.n() || x.g.xmin != y.g.xmin || x.g.xmax != y.g.xmax)
    throw config_error("trace-norm distance: grids do not match");
  ReducedDensityMatrix d{x.g, x.a};
  for (std::size_t i = 0; i < d.a.size(); ++i) d.a[i] -= y.a[i];
  return trace_norm(d);
}

// Heavy-particle state once the light particle has flown off: an equal
// mixture of the two freely evolved branches with coherence lambda between
// them,
//   rho(R,R') = 1/2 [F+(R) F+~(R') + F-(R) F-~(R')]
//             + lambda/2 F+(R) F-~(R') + conj(lambda)/2 F-(R) F+~(R'),
// where F+- are the pair's branches evolved for time tau.  lambda = 1 is the
// coherent pure superposition, lambda = 0 the classical statistical mixture.
inline ReducedDensityMatrix branch_coherence_matrix(const HeavyPair& pair, double tau,
                                                    const Grid& gR, cplx lambda,
                                                    std::size_t workers = 1) {
  if (!(tau > 0.0)) throw config_error("branch matrix: tau must be positive");
  auto rho = make_density_matrix(gR);
  const FreeEvolutionTable tp(pair.plus(), tau), tm(pair.minus(), tau);
  std::vector<cplx> fp(gR.n), fm(gR.n);
  for (std::size_t i = 0; i < gR.n; ++i) {
    fp[i] = tp.evolved(gR.x(i));
    fm[i] = tm.evolved(gR.x(i));
  }
  const cplx lb = std::conj(lambda);
  parallel_for(gR.n, workers, [&](std::size_t i) {
    for (std::size_t j = 0; j < gR.n; ++j) {
      rho.at(i, j) = 0.5 * (fp[i] * std::conj(fp[j]) + fm[i] * std::conj(fm[j])) +
                     0.5 * lambda * fp[i] * std::conj(fm[j]) +
                     0.5 * lb * fm[i] * std::conj(fp[j]);
    }
  });
  return rho;
}

} // namespace dcl
