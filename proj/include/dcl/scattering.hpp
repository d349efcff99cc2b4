#pragma once
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "complex_field.hpp"
#include "errors.hpp"
#include "grid.hpp"

namespace dcl {

// Stationary scattering amplitudes of a repulsive point interaction of
// strength alpha (alpha >= 0) for a unit-mass particle:
//   refl(k)  = -alpha / (alpha - i|k|)
//   trans(k) = -i|k| / (alpha - i|k|)
// Exact identities: |refl|^2 + |trans|^2 = 1 and 1 + refl = trans.
// alpha = 0 is free propagation: refl = 0, trans = 1 at every k (including 0);
// for alpha > 0 the k = 0 values are refl = -1, trans = 0 (total reflection).
struct DeltaAmplitudes {
  double alpha = 0.0;

  cplx refl(double k) const {
    if (alpha == 0.0) return 0.0;
    return -alpha / cplx(alpha, -std::fabs(k));
  }
  cplx trans(double k) const {
    if (alpha == 0.0) return 1.0;
    return cplx(0.0, -std::fabs(k)) / cplx(alpha, -std::fabs(k));
  }
  double refl2(double k) const { return alpha == 0.0 ? 0.0 : alpha * alpha / (alpha * alpha + k * k); }
  double trans2(double k) const { return alpha == 0.0 ? 1.0 : k * k / (alpha * alpha + k * k); }
};

// Fraction of |f|^2 mass at or to the right of coordinate x.  The inverse
// wave operator below is only valid for states supported strictly to the
// left of the scattering center; callers use this to enforce that.
inline double mass_fraction_at_or_right(const Field& f, double x) {
  double bad = 0.0, tot = 0.0;
  for (std::size_t i = 0; i < f.grid.n; ++i) {
    const double m = std::norm(f.a[i]);
    tot += m;
    if (f.grid.x(i) >= x) bad += m;
  }
  return tot > 0.0 ? bad / tot : 0.0;
}

// Inverse of the outgoing wave operator for a point scatterer at position x,
// acting on states supported strictly left of x.  In momentum space:
//   out(k) = trans(k) in(k)                                   for k > 0
//   out(k) = in(k) + e^{-2ikx} refl(k) in(-k)                 for k <= 0
// (k = 0 belongs to the second branch; on the periodic lattice the Nyquist
// bin is its own mirror).  For admissible states this is an isometry up to a
// k = 0 contamination of order |in(0)|^2 dk.
class InverseWaveOp {
 public:
  InverseWaveOp(DeltaAmplitudes amps, double x) : amps_(amps), x_(x) {}

  double center() const { return x_; }
  const DeltaAmplitudes& amplitudes() const { return amps_; }

  // Bin-ordered spectrum -> bin-ordered spectrum.
  std::vector<cplx> apply_spectrum(const Grid& g, const std::vector<cplx>& in) const {
    std::vector<cplx> out(g.n);
    for (std::size_t b = 0; b < g.n; ++b) {
      const double k = g.k(b);
      if (k > 0.0) {
        out[b] = amps_.trans(k) * in[b];
      } else {
        out[b] = in[b] + phase_factor(-2.0 * k * x_) * amps_.refl(k) * in[g.mirror_bin(b)];
      }
    }
    return out;
  }

  // Position-space convenience; rejects inputs with more than reject_mass of
  // their probability at or beyond the scattering center.
  Field apply(const Field& f, double reject_mass = 1e-12) const {
    const double viol = mass_fraction_at_or_right(f, x_);
    if (viol > reject_mass)
      throw invariant_violation("inverse wave operator: input has mass fraction " +
                                std::to_string(viol) + " at or right of the scattering center");
    return inverse_ft(f.grid, apply_spectrum(f.grid, forward_ft(f)));
  }

 private:
  DeltaAmplitudes amps_;
  double x_;
};

} // namespace dcl
