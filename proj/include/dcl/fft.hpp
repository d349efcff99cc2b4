#pragma once
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "errors.hpp"

namespace dcl {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSqrtTwoPi = 2.506628274631000502415765284811;

// Radix-2 decimation-in-time transform of size n (a power of two) with
// precomputed bit-reversal permutation and twiddle factors.  Immutable after
// construction, so a shared plan may be used from many threads at once.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n == 0 || (n & (n - 1)) != 0)
      throw config_error("fft: transform size must be a power of two, got " + std::to_string(n));
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    rev_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < log2n; ++b) r |= ((i >> b) & 1u) << (log2n - 1 - b);
      rev_[i] = r;
    }
    w_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = -kTwoPi * double(k) / double(n);
      w_[k] = cplx(std::cos(ang), std::sin(ang));
    }
  }

  std::size_t size() const { return n_; }

  // forward: X_j = sum_m x_m e^{-2*pi*i jm/n}.  inverse: x_m = (1/n) sum_j X_j e^{+2*pi*i jm/n}.
  void forward(cplx* x) const { transform(x, false); }
  void inverse(cplx* x) const { transform(x, true); }

 private:
  void transform(cplx* x, bool invert) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = rev_[i];
      if (i < r) std::swap(x[i], x[r]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n / len;
      for (std::size_t i = 0; i < n; i += len) {
        for (std::size_t j = 0; j < half; ++j) {
          cplx w = w_[j * stride];
          if (invert) w = std::conj(w);
          const cplx u = x[i + j];
          const cplx v = x[i + j + half] * w;
          x[i + j] = u + v;
          x[i + j + half] = u - v;
        }
      }
    }
    if (invert) {
      const double s = 1.0 / double(n);
      for (std::size_t i = 0; i < n; ++i) x[i] *= s;
    }
  }

  std::size_t n_;
  std::vector<std::size_t> rev_;
  std::vector<cplx> w_;
};

// Process-wide plan cache.  Plans are immutable; the lock only guards the map.
inline std::shared_ptr<const FftPlan> fft_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_shared<const FftPlan>(n)).first;
  return it->second;
}

inline void dft(std::vector<cplx>& x) { fft_plan(x.size())->forward(x.data()); }
inline void idft(std::vector<cplx>& x) { fft_plan(x.size())->inverse(x.data()); }
inline void dft(cplx* x, std::size_t n) { fft_plan(n)->forward(x); }
inline void idft(cplx* x, std::size_t n) { fft_plan(n)->inverse(x); }

} // namespace dcl
