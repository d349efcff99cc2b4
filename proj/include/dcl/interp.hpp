#pragma once
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "fft.hpp"

namespace dcl {

// Order-10 (11-point) Lagrange interpolation weights at fractional offset
// v in [5, 6) within a uniform 11-node stencil 0..10, in barycentric form.
// On tables that oversample the fastest oscillation by ~8x or more the
// interpolation error sits near double round-off.
inline constexpr std::size_t kInterpTaps = 11;

namespace detail {
// (-1)^j * binom(10, j)
inline constexpr double kBaryW[kInterpTaps] = {1,  -10, 45,  -120, 210, -252,
                                               210, -120, 45,  -10,  1};
} // namespace detail

// weights[j] such that f(v) = sum_j weights[j] * f(node j), exact for
// polynomials of degree <= 10.  v is measured from node 0 of the stencil.
inline void lagrange_weights(double v, double* weights) {
  // Exact-node hit: fall back to a Kronecker delta to avoid 1/0.
  for (std::size_t j = 0; j < kInterpTaps; ++j) {
    const double d = v - double(j);
    if (std::fabs(d) < 1e-12) {
      for (std::size_t m = 0; m < kInterpTaps; ++m) weights[m] = (m == j) ? 1.0 : 0.0;
      return;
    }
  }
  double q[kInterpTaps];
  double den = 0.0;
  for (std::size_t j = 0; j < kInterpTaps; ++j) {
    q[j] = detail::kBaryW[j] / (v - double(j));
    den += q[j];
  }
  for (std::size_t j = 0; j < kInterpTaps; ++j) weights[j] = q[j] / den;
}

// Uniform periodic sample table t[i] = F(x0 + i*dx) of an (n*dx)-periodic
// function; evaluation wraps modularly, so no edge handling is needed.
class PeriodicTable {
 public:
  PeriodicTable() = default;
  PeriodicTable(double x0, double dx, std::vector<cplx> samples)
      : x0_(x0), dx_(dx), t_(std::move(samples)) {}

  std::size_t size() const { return t_.size(); }
  double x0() const { return x0_; }
  double dx() const { return dx_; }
  double period() const { return dx_ * double(t_.size()); }
  const std::vector<cplx>& samples() const { return t_; }

  cplx operator()(double x) const {
    const double u = (x - x0_) / dx_;
    const std::int64_t i0 = std::int64_t(std::floor(u)) - std::int64_t(kInterpTaps / 2);
    double w[kInterpTaps];
    lagrange_weights(u - double(i0), w);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < kInterpTaps; ++j) acc += w[j] * wrapped(i0 + std::int64_t(j));
    return acc;
  }

 private:
  cplx wrapped(std::int64_t i) const {
    const std::int64_t n = std::int64_t(t_.size());
    std::int64_t m = i % n;
    if (m < 0) m += n;
    return t_[std::size_t(m)];
  }

  double x0_ = 0.0;
  double dx_ = 1.0;
  std::vector<cplx> t_;
};

} // namespace dcl
