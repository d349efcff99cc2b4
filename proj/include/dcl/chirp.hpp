#pragma once
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "complex_field.hpp"
#include "fft.hpp"
#include "grid.hpp"
#include "interp.hpp"
#include "packet.hpp"

namespace dcl {

// e^{-i pi/4} / sqrt(t) * e^{i x^2 / (2 t)} -- the free-propagator prefactor.
inline cplx chirp_prefactor(double t, double x) {
  return phase_factor(-0.25 * kPi + x * x / (2.0 * t)) / std::sqrt(t);
}

// Free Schroedinger evolution of a packet f for time tau (unit mass), with an
// optional momentum kick applied to the initial state:
//   Q(R, k) = int K_tau(R - x) f(x) e^{-2 i k x} dx,
//   K_tau(s) = (2 pi i tau)^{-1/2} e^{i s^2/(2 tau)}.
// Expanding the kernel chirp gives the closed form
//   Q(R, k) = e^{-i pi/4} tau^{-1/2} e^{i R^2/(2 tau)} Ht(R/tau + 2k),
// where Ht is the unitary Fourier transform of H(x) = f(x) e^{i x^2/(2 tau)}.
// H is sampled once on a grid resolving the chirp's local frequency, padded
// 16x, and transformed; evaluations interpolate the padded spectrum.  P(R) is
// the k = 0 special case.
class FreeEvolutionTable {
 public:
  // sample: the packet amplitude; [lo, hi]: interval carrying all of its mass
  // (to round-off); band: bound on the packet's own momentum content.
  FreeEvolutionTable(const std::function<cplx(double)>& sample, double lo, double hi, double band,
                     double tau)
      : tau_(tau), center_(0.5 * (lo + hi)) {
    const double half = 0.5 * (hi - lo);
    // chirp raises the local frequency by |x|/tau over the sampling window
    const double full_band = band + (std::fabs(center_) + half) / tau;
    const double h_needed = kPi / (1.35 * full_band);
    std::size_t n = 64;
    while (double(n) * h_needed < 2.0 * half) n <<= 1;
    const Grid gx = make_grid(center_ - half, center_ + half, n);

    const std::size_t npad = n * 16;
    std::vector<cplx> padded(npad, cplx(0.0));
    // recentred samples H(center + u) keep interpolation frequencies at
    // |u| <= half, which the 16x padding oversamples ~16x per oscillation
    for (std::size_t i = 0; i < n; ++i) {
      const double x = gx.x(i);
      padded[i] = sample(x) * phase_factor(x * x / (2.0 * tau));
    }
    dft(padded);
    // padded grid starts at u = -half: fold in the e^{-i w u_min} phase and
    // the h/sqrt(2 pi) weight, then reorder ascending in w
    const Grid gu = make_grid(-half, -half + double(npad) * gx.h(), npad);
    const double c = gx.h() / kSqrtTwoPi;
    std::vector<cplx> spec(npad);
    for (std::size_t b = 0; b < npad; ++b)
      spec[b] = padded[b] * c * phase_factor(-gu.k(b) * gu.xmin);
    const Grid gw = momentum_grid(gu);
    table_ = PeriodicTable(gw.xmin, gw.h(), to_ascending(gu, spec));

    // beyond w_cut the chirped spectrum is zero to round-off; cutting there
    // also keeps evaluations away from the table's periodic wrap at
    // gu.kmax() = pi / gx.h(), the edge of the tabulated w range
    w_cut_ = std::min(1.2 * full_band, 0.98 * gu.kmax());
  }

  FreeEvolutionTable(const GaussPacket& pk, double tau)
      : FreeEvolutionTable([pk](double x) { return pk.position(x); }, pk.center - 10.0 * pk.sigma,
                           pk.center + 10.0 * pk.sigma, std::fabs(pk.p) + 10.0 / pk.sigma, tau) {}

  FreeEvolutionTable(const LightPacket& pk, double tau)
      : FreeEvolutionTable([pk](double x) { return pk.position(x); }, pk.support_lo(),
                           pk.support_hi(), std::fabs(pk.q0) + 400.0 / pk.delta, tau) {}

  double tau() const { return tau_; }
  double w_cut() const { return w_cut_; }

  // Q(R, k); the evolved packet itself is evolved(R) = Q(R, 0).
  cplx kicked(double R, double k) const {
    const double w = R / tau_ + 2.0 * k;
    if (std::fabs(w) > w_cut_) return 0.0;
    return chirp_prefactor(tau_, R) * phase_factor(-w * center_) * table_(w);
  }
  cplx evolved(double R) const { return kicked(R, 0.0); }

 private:
  double tau_;
  double center_;
  double w_cut_ = 0.0;
  PeriodicTable table_;
};

} // namespace dcl
