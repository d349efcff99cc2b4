#pragma once
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "bump.hpp"
#include "density_matrix.hpp"
#include "errors.hpp"
#include "packet.hpp"
#include "scattering.hpp"

namespace dcl {

// L2 norm of d/dz gt for the unit-width envelope.  By Parseval this equals
// ||x g(x)||_L2, a pure shape constant, evaluated here by midpoint quadrature
// over the compact support (the integrand is C-infinity with all derivatives
// vanishing at the endpoints, so the rule converges superalgebraically).
inline double envelope_ft_deriv_norm() {
  static const double value = [] {
    const std::size_t n = std::size_t{1} << 16;
    const double h = 2.0 / double(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = -1.0 + (double(i) + 0.5) * h;
      const double xg = x * bump()(x);
      s += xg * xg;
    }
    return std::sqrt(s * h);
  }();
  return value;
}

namespace detail {

// Uniform midpoint rule over [-kmax, kmax] covering the light momentum
// density.  kmax keeps the discarded envelope mass below ~1e-13; dk resolves
// the fastest position-space shift appearing in any phase (mirror distances,
// the envelope autocorrelation width 4*delta, and the 1/alpha Lorentzian
// scale of the amplitudes), so the rule's aliasing images fall where the
// integrand's spectrum is empty.
struct MomentumBand {
  double kmax = 0.0;
  double dk = 0.0;
  std::size_t n = 0;

  double node(std::size_t j) const { return -kmax + (double(j) + 0.5) * dk; }
};

inline MomentumBand light_band(const LightPacket& lp, double shift, double alpha) {
  if (!(lp.delta > 0.0)) throw config_error("momentum quadrature: delta must be positive");
  const double kmax = std::fabs(lp.q0) + 170.0 / lp.delta;
  double bandwidth = 4.0 * lp.delta + 2.0 * std::fabs(shift) + 16.0;
  if (alpha > 0.0) bandwidth += 37.0 / alpha;
  const double dk = kTwoPi / (3.0 * bandwidth);
  const double npts = std::ceil(2.0 * kmax / dk);
  if (!(npts <= 8.0e6)) throw config_error("momentum quadrature: band/resolution out of range");
  MomentumBand b;
  b.n = std::size_t(npts);
  b.kmax = kmax;
  b.dk = 2.0 * kmax / double(b.n);
  return b;
}

// Outgoing light field attached to a branch mirrored at `mirror`, chirp
// prefactor stripped: trans(k) gt(k) + refl(k) e^{-2 i mirror k} gt(-k).
inline cplx channel_bracket(const DeltaAmplitudes& amps, const LightPacket& lp, double mirror,
                            double k) {
  return amps.trans(k) * lp.ft(k) + amps.refl(k) * phase_factor(-2.0 * mirror * k) * lp.ft(-k);
}

inline void require_valid(const AsymptoticParams& p) {
  if (!(p.eps > 0.0) || !(p.tau > 0.0))
    throw config_error("decoherence: eps and tau must be positive");
  if (p.alpha < 0.0) throw config_error("decoherence: alpha must be nonnegative");
  if (!(p.light.delta > 0.0)) throw config_error("decoherence: delta must be positive");
  if (p.heavy.R0 < 0.0) throw config_error("decoherence: R0 must be nonnegative");
}

} // namespace detail

// Coherence left between the heavy branches after the light particle has
// scattered off both: the L2 pairing of the outgoing light fields attached to
// the two branches.  The chirp prefactors cancel inside the pairing, leaving
// the momentum-density form sampled on the midpoint band; the value is
// invariant under further free flight, so tau only enters validation.
inline cplx lambda_exact(const AsymptoticParams& p) {
  detail::require_valid(p);
  const DeltaAmplitudes amps{p.alpha};
  const double d = 2.0 * p.heavy.R0;
  const auto band = detail::light_band(p.light, 2.0 * d, p.alpha);
  cplx s = 0.0;
  for (std::size_t j = 0; j < band.n; ++j) {
    const double k = band.node(j);
    s += detail::channel_bracket(amps, p.light, -p.heavy.R0, k) *
         std::conj(detail::channel_bracket(amps, p.light, +p.heavy.R0, k));
  }
  return s * band.dk;
}

// Probability that the light particle goes through: int |trans|^2 |gt|^2 dk.
// Free-flight invariant, in [0, 1] up to quadrature round-off.
inline double transmission_probability(const AsymptoticParams& p) {
  detail::require_valid(p);
  const DeltaAmplitudes amps{p.alpha};
  const auto band = detail::light_band(p.light, 0.0, p.alpha);
  double s = 0.0;
  for (std::size_t j = 0; j < band.n; ++j) {
    const double k = band.node(j);
    s += amps.trans2(k) * std::norm(p.light.ft(k));
  }
  return s * band.dk;
}

// The same probability from the transmitted channel field in position space
// at the fast clock (the cross-check change of variables).
inline double transmission_position(const AsymptoticParams& p) {
  detail::require_valid(p);
  const AsymptoticFields f(p);
  const double t = p.t_fast();
  const auto band = detail::light_band(p.light, 0.0, p.alpha);
  double s = 0.0;
  for (std::size_t j = 0; j < band.n; ++j) s += std::norm(f.channel_trans(t * band.node(j)));
  return s * t * band.dk;
}

// Oscillatory pairing of the two reflected channels: with d = 2 R0,
//   int |refl(k)|^2 |gt(-k)|^2 e^{2 i d k} dk.
inline cplx overlap_integral(const AsymptoticParams& p) {
  detail::require_valid(p);
  const DeltaAmplitudes amps{p.alpha};
  const double d = 2.0 * p.heavy.R0;
  const auto band = detail::light_band(p.light, 2.0 * d, p.alpha);
  cplx s = 0.0;
  for (std::size_t j = 0; j < band.n; ++j) {
    const double k = band.node(j);
    s += amps.refl2(k) * std::norm(p.light.ft(-k)) * phase_factor(2.0 * d * k);
  }
  return s * band.dk;
}

// The same pairing evaluated from the two reflected channel fields in
// position space (independent quadrature of the identical integral).
inline cplx overlap_position(const AsymptoticParams& p) {
  detail::require_valid(p);
  const AsymptoticFields f(p);
  const double t = p.t_fast();
  const double d = 2.0 * p.heavy.R0;
  const auto band = detail::light_band(p.light, 2.0 * d, p.alpha);
  cplx s = 0.0;
  for (std::size_t j = 0; j < band.n; ++j) {
    const double r = t * band.node(j);
    s += f.channel_refl(r, -p.heavy.R0) * std::conj(f.channel_refl(r, +p.heavy.R0));
  }
  return s * t * band.dk;
}

// Rigorous modulus bound for the overlap pairing: 1/(d alpha) plus the
// envelope-derivative term (delta/d) ||gt'||.  Degenerates to +infinity when
// either scale is absent (alpha = 0 or R0 = 0), where it carries no content.
inline double overlap_bound(const AsymptoticParams& p) {
  detail::require_valid(p);
  const double d = 2.0 * p.heavy.R0;
  if (!(p.alpha > 0.0) || !(d > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / (d * p.alpha) + (p.light.delta / d) * envelope_ft_deriv_norm();
}

// Envelope mass sitting past the carrier in momentum: 2 int_{delta q0}^inf
// |gt|^2.  Controls every superpolynomially-small remainder in the channel
// decomposition.
inline double envelope_tail_mass(const AsymptoticParams& p) {
  return bump().ft_tail2(p.light.delta * p.light.q0);
}

// Everything the channel decomposition asserts about one configuration, in
// one record.  norm_errors holds labeled cross-check distances between
// independent evaluations of the same quantities.
struct DecoherenceReport {
  cplx lambda;
  double transmission_probability = 0.0;
  cplx overlap_I;
  double bound_I = 0.0;
  double tail = 0.0;
  std::map<std::string, double> norm_errors;

  // Inequalities the decomposition guarantees; quadrature slacks only.
  void validate() const {
    if (!(std::abs(lambda) <= 1.0 + 1e-9))
      throw invariant_violation("decoherence report: |lambda| exceeds 1");
    if (!(std::abs(overlap_I) <= bound_I + 1e-6))
      throw invariant_violation("decoherence report: overlap exceeds its bound");
    if (!(std::abs(lambda - transmission_probability) <= bound_I + tail + 1e-6))
      throw invariant_violation("decoherence report: lambda drifts from the transmission probability");
    if (!(std::abs(lambda - transmission_probability - overlap_I) <= 10.0 * tail))
      throw invariant_violation("decoherence report: decomposition residual exceeds the tail budget");
  }

  std::string format() const {
    char line[160];
    std::string out;
    auto put = [&](const char* key, double v) {
      std::snprintf(line, sizeof line, "%s = %.17g\n", key, v);
      out += line;
    };
    put("lambda_re", lambda.real());
    put("lambda_im", lambda.imag());
    put("lambda_abs", std::abs(lambda));
    put("transmission_probability", transmission_probability);
    put("overlap_I_re", overlap_I.real());
    put("overlap_I_im", overlap_I.imag());
    put("overlap_I_abs", std::abs(overlap_I));
    put("bound_I", bound_I);
    put("tail", tail);
    for (const auto& [key, v] : norm_errors) put(("norm_error_" + key).c_str(), v);
    return out;
  }
};

// Assembles the full report for one configuration and validates it.  The
// cross-check distances pit the momentum-band quadratures against the
// position-space channel fields of the asymptotics layer.
inline DecoherenceReport lambda_decomposition(const AsymptoticParams& p) {
  detail::require_valid(p);
  DecoherenceReport rep;
  rep.lambda = lambda_exact(p);
  rep.transmission_probability = transmission_probability(p);
  rep.overlap_I = overlap_integral(p);
  rep.bound_I = overlap_bound(p);
  rep.tail = envelope_tail_mass(p);

  const DeltaAmplitudes amps{p.alpha};
  const auto band = detail::light_band(p.light, 4.0 * p.heavy.R0, p.alpha);
  double np = 0.0, nm = 0.0;
  for (std::size_t j = 0; j < band.n; ++j) {
    const double k = band.node(j);
    np += std::norm(detail::channel_bracket(amps, p.light, -p.heavy.R0, k));
    nm += std::norm(detail::channel_bracket(amps, p.light, +p.heavy.R0, k));
  }
  rep.norm_errors["channel_norm_plus_defect"] = std::fabs(np * band.dk - 1.0);
  rep.norm_errors["channel_norm_minus_defect"] = std::fabs(nm * band.dk - 1.0);
  rep.norm_errors["transmission_position_gap"] =
      std::fabs(rep.transmission_probability - transmission_position(p));
  rep.norm_errors["overlap_position_gap"] = std::abs(rep.overlap_I - overlap_position(p));

  rep.validate();
  return rep;
}

// Reads the branch coherence back out of an arbitrary reduced density matrix
// by projecting onto the freely evolved branch pair and normalizing by the
// diagonal blocks.  This is an estimator, exact for the branch form when the
// branches are orthogonal and biased at the size of their residual overlap.
inline cplx lambda_estimate(const ReducedDensityMatrix& rho, const HeavyPair& pair, double tau) {
  if (!(tau > 0.0)) throw config_error("lambda estimate: tau must be positive");
  const std::size_t n = rho.n();
  const FreeEvolutionTable tp(pair.plus(), tau), tm(pair.minus(), tau);
  std::vector<cplx> fp(n), fm(n);
  for (std::size_t i = 0; i < n; ++i) {
    fp[i] = tp.evolved(rho.g.x(i));
    fm[i] = tm.evolved(rho.g.x(i));
  }
  // rho applied to each branch, then paired: <a, rho b> with h^2 weights
  cplx num = 0.0, dp = 0.0, dm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cplx rp = 0.0, rm = 0.0;
    const cplx* row = &rho.a[i * n];
    for (std::size_t j = 0; j < n; ++j) {
      rp += row[j] * fp[j];
      rm += row[j] * fm[j];
    }
    num += std::conj(fp[i]) * rm;
    dp += std::conj(fp[i]) * rp;
    dm += std::conj(fm[i]) * rm;
  }
  const double den = dp.real() + dm.real();
  if (!(den > 0.0)) throw numerical_guard("lambda estimate: branch projections vanish");
  return 2.0 * num / den;
}

namespace detail {

// (max - min)/(max + min) of the sampled density over the central fringe
// window: one fringe period pi/P0 each side of the branch-center midpoint.
inline double fringe_visibility(const std::vector<double>& dens, const Grid& g,
                                const HeavyPair& pair, double tau) {
  if (!(tau > 0.0)) throw config_error("visibility: tau must be positive");
  if (!(pair.P0 > 0.0)) throw config_error("visibility: branch momentum must be positive");
  if (!(pair.sigma > 0.0)) throw config_error("visibility: branch width must be positive");
  const double cp = -pair.R0 + pair.P0 * tau;
  const double cm = +pair.R0 - pair.P0 * tau;
  const double spread =
      std::sqrt(pair.sigma * pair.sigma + (tau / pair.sigma) * (tau / pair.sigma));
  if (std::fabs(cp - cm) > 5.0 * spread)
    throw config_error("visibility: branches do not overlap at the readout time");
  const double mid = 0.5 * (cp + cm);
  const double w = kPi / pair.P0;
  if (g.n == 0 || g.xmin > mid - w || g.x(g.n - 1) < mid + w)
    throw config_error("visibility: grid does not cover the fringe window");
  if (g.h() > w / 12.0) throw config_error("visibility: grid too coarse to resolve the fringes");
  double vmax = -std::numeric_limits<double>::infinity();
  double vmin = +std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.n; ++i) {
    const double x = g.x(i);
    if (x < mid - w || x > mid + w) continue;
    vmax = std::max(vmax, dens[i]);
    vmin = std::min(vmin, dens[i]);
  }
  if (!(vmax + vmin > 0.0))
    throw numerical_guard("visibility: degenerate density in the fringe window");
  return (vmax - vmin) / (vmax + vmin);
}

} // namespace detail

inline double interference_visibility(const ReducedDensityMatrix& rho, const HeavyPair& pair,
                                      double tau_meet) {
  std::vector<double> dens(rho.n());
  for (std::size_t i = 0; i < rho.n(); ++i) dens[i] = rho.at(i, i).real();
  return detail::fringe_visibility(dens, rho.g, pair, tau_meet);
}

inline double interference_visibility(const HeavyDensityProfile& prof, const HeavyPair& pair,
                                      double tau_meet) {
  return detail::fringe_visibility(prof.n, prof.g, pair, tau_meet);
}

// Visibility of the fully coherent pure superposition of the same branch
// pair on the same grid -- the reference the coherence magnitude multiplies.
inline double pure_reference_visibility(const HeavyPair& pair, double tau_meet, const Grid& g) {
  if (!(tau_meet > 0.0)) throw config_error("visibility: tau must be positive");
  const FreeEvolutionTable tp(pair.plus(), tau_meet), tm(pair.minus(), tau_meet);
  std::vector<double> dens(g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    dens[i] = 0.5 * std::norm(tp.evolved(g.x(i)) + tm.evolved(g.x(i)));
  return detail::fringe_visibility(dens, g, pair, tau_meet);
}

// Pointwise samples of the scattered closed form on the physical plane: gx
// carries the heavy coordinate, gy the light one -- the layout
// partial_trace_light expects.
inline Field2D sample_scattered_field(const AsymptoticFields& f, const Grid& gR, const Grid& gr,
                                      std::size_t workers = 1) {
  auto out = make_field2d(gR, gr);
  parallel_for(gR.n, workers, [&](std::size_t ix) {
    const double R = gR.x(ix);
    for (std::size_t iy = 0; iy < gr.n; ++iy) out.at(ix, iy) = f.psi_e(R, gr.x(iy));
  });
  return out;
}

} // namespace dcl
