#pragma once
#include <cmath>
#include <cstddef>

#include "bump.hpp"
#include "complex_field.hpp"
#include "grid.hpp"

namespace dcl {

// Light-particle wavepacket: compactly supported bump envelope of half-width
// delta centered at r0, carrier momentum q0:
//   f(r)  = delta^{-1/2} g((r - r0)/delta) e^{i q0 r}
//   ft(k) = e^{i (q0 - k) r0} sqrt(delta) gt(delta (k - q0))
// Unit L2 norm; support is exactly [r0 - delta, r0 + delta].
struct LightPacket {
  double delta = 1.0;
  double q0 = 0.0;
  double r0 = 0.0;

  double support_lo() const { return r0 - delta; }
  double support_hi() const { return r0 + delta; }

  cplx position(double r) const {
    const double env = bump()((r - r0) / delta) / std::sqrt(delta);
    return env == 0.0 ? cplx(0.0) : env * phase_factor(q0 * r);
  }
  cplx ft(double k) const {
    return phase_factor((q0 - k) * r0) * std::sqrt(delta) * bump().ft(delta * (k - q0));
  }

  Field sample(const Grid& g) const {
    Field f = make_field(g);
    for (std::size_t i = 0; i < g.n; ++i) f.a[i] = position(g.x(i));
    return f;
  }
};

// Normalized Gaussian packet centered at c with carrier momentum p:
//   f(R)  = (pi s^2)^{-1/4} e^{-(R-c)^2 / (2 s^2)} e^{i p R}
//   ft(k) = (s^2/pi)^{1/4} e^{-s^2 (k-p)^2 / 2} e^{-i (k-p) c}
struct GaussPacket {
  double sigma = 1.0;
  double center = 0.0;
  double p = 0.0;

  cplx position(double R) const {
    const double u = (R - center) / sigma;
    return std::pow(kPi * sigma * sigma, -0.25) * std::exp(-0.5 * u * u) * phase_factor(p * R);
  }
  cplx ft(double k) const {
    const double v = sigma * (k - p);
    return std::pow(sigma * sigma / kPi, 0.25) * std::exp(-0.5 * v * v) *
           phase_factor(-(k - p) * center);
  }

  Field sample(const Grid& g) const {
    Field f = make_field(g);
    for (std::size_t i = 0; i < g.n; ++i) f.a[i] = position(g.x(i));
    return f;
  }
};

// Heavy-particle superposition: the "+" branch starts at -R0 moving right
// (+P0), the "-" branch at +R0 moving left (-P0); they meet at the origin at
// time R0/P0.  The prepared state is (f_plus + f_minus)/sqrt(2).
struct HeavyPair {
  double sigma = 1.0;
  double R0 = 0.0;
  double P0 = 0.0;

  GaussPacket plus() const { return GaussPacket{sigma, -R0, +P0}; }
  GaussPacket minus() const { return GaussPacket{sigma, +R0, -P0}; }
};

} // namespace dcl
