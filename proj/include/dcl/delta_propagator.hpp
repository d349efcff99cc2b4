#pragma once
#include <cmath>
#include <cstddef>
#include <vector>

#include "complex_field.hpp"
#include "errors.hpp"
#include "fft.hpp"
#include "grid.hpp"

namespace dcl {

// Time evolution of a unit-mass wavefunction across a repulsive point
// interaction at the origin, H = -(1/2) d^2/dy^2 + alpha delta(y).
//
// On the lattice the interaction is the band-limited delta: a rank-one
// potential (alpha_bare / h) |e0><e0| on the origin's spectral profile, which
// couples every momentum bin with equal real weight.  The Hamiltonian is
// diagonalized exactly: in each +-k bin pair the difference combination never
// sees the origin and keeps its free dispersion, while the sum combinations
// form a rank-one update of diag(k^2/2) solved by its secular equation.  The
// eigenbasis is orthonormal to round-off (eigenvector weights are recomputed
// from the converged roots, Gu-Eisenstat style), so evolution is exactly
// unitary and exactly a semigroup at any time step.
//
// The band-limited delta scatters slightly differently from the ideal one:
// its free Green's function at the origin misses the |q| > kmax tail, worth
// 2/(pi kmax).  The bare coupling is renormalized,
//     alpha_bare = alpha / (1 + 2 alpha / (pi kmax)),
// which restores the ideal reflection and transmission amplitudes up to
// O((k/kmax)^2) corrections.
class DeltaPropagator {
 public:
  // Eigenvector storage is (n/2+1)^2 doubles; the cap keeps it to ~134 MB.
  // Free grids (alpha = 0) build no eigenbasis and are exempt.
  static constexpr std::size_t kMaxPoints = 8192;

  DeltaPropagator(const Grid& g, double alpha) : g_(g), alpha_(alpha) {
    if (!(alpha >= 0.0))
      throw config_error("DeltaPropagator: interaction strength must be nonnegative");
    if (alpha > 0.0 && g.n > kMaxPoints)
      throw config_error("DeltaPropagator: grid exceeds the eigenbasis size cap");
    if (!(g.xmin < 0.0 && g.xmax > 0.0))
      throw config_error("DeltaPropagator: the interaction point y = 0 must lie inside the box");
    m_ = g.n / 2 + 1;
    dvals_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const double k = double(i) * g.dk();
      dvals_[i] = 0.5 * k * k;
    }
    if (alpha_ == 0.0) return;
    bare_ = alpha_ / (1.0 + 2.0 * alpha_ / (kPi * g.kmax()));
    rho_ = bare_ / g.h();
    build_eigenbasis();
  }

  const Grid& grid() const { return g_; }
  double alpha() const { return alpha_; }
  double bare_coupling() const { return bare_; }
  // Eigenvalues of the even-parity sector, ascending (free values if alpha=0).
  const std::vector<double>& even_eigenvalues() const {
    return alpha_ == 0.0 ? dvals_ : lam_;
  }

  // psi -> e^{-i H t} psi, exactly unitary for any t.
  Field evolve(const Field& psi, double t) const {
    require_same_grid(psi);
    if (!std::isfinite(t)) throw config_error("DeltaPropagator: time must be finite");
    std::vector<cplx> spec = forward_ft(psi);
    if (alpha_ == 0.0) {
      for (std::size_t b = 0; b < g_.n; ++b) {
        const double k = g_.k(b);
        spec[b] *= phase_factor(-0.5 * k * k * t);
      }
      return inverse_ft(g_, spec);
    }
    // split across the parity of the interaction point: s = even, r = odd
    const std::size_t half = g_.n / 2;
    std::vector<cplx> s(m_), r(m_, cplx(0.0));
    s[0] = spec[0];
    s[m_ - 1] = spec[half];
    for (std::size_t i = 1; i < half; ++i) {
      s[i] = (spec[i] + spec[g_.n - i]) * kInvSqrt2;
      r[i] = (spec[i] - spec[g_.n - i]) * kInvSqrt2;
    }
    // even sector through the eigenbasis, odd sector by free phases
    std::vector<cplx> b(m_, cplx(0.0));
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = &q_[i * m_];
      cplx acc = 0.0;
      for (std::size_t j = 0; j < m_; ++j) acc += row[j] * s[j];
      b[i] = acc * phase_factor(-lam_[i] * t);
    }
    std::fill(s.begin(), s.end(), cplx(0.0));
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = &q_[i * m_];
      const cplx c = b[i];
      for (std::size_t j = 0; j < m_; ++j) s[j] += c * row[j];
    }
    for (std::size_t i = 1; i < half; ++i) r[i] *= phase_factor(-dvals_[i] * t);
    spec[0] = s[0];
    spec[half] = s[m_ - 1];
    for (std::size_t i = 1; i < half; ++i) {
      spec[i] = (s[i] + r[i]) * kInvSqrt2;
      spec[g_.n - i] = (s[i] - r[i]) * kInvSqrt2;
    }
    return inverse_ft(g_, spec);
  }

  // H psi, for energy bookkeeping: spectral kinetic part plus the rank-one
  // band-limited interaction alpha_bare psi(0) * (band-limited delta).
  Field apply_hamiltonian(const Field& psi) const {
    require_same_grid(psi);
    std::vector<cplx> spec = forward_ft(psi);
    cplx at0 = 0.0; // <band-limited delta, psi> = sum of spectrum / sqrt(2 pi)
    for (std::size_t b = 0; b < g_.n; ++b) at0 += spec[b];
    at0 *= g_.dk() / kSqrtTwoPi;
    for (std::size_t b = 0; b < g_.n; ++b) {
      const double k = g_.k(b);
      spec[b] = 0.5 * k * k * spec[b] + bare_ * at0 / kSqrtTwoPi;
    }
    return inverse_ft(g_, spec);
  }

 private:
  static constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

  void require_same_grid(const Field& f) const {
    if (f.grid.n != g_.n || f.grid.xmin != g_.xmin || f.grid.xmax != g_.xmax)
      throw config_error("DeltaPropagator: field grid does not match the propagator grid");
  }

  // Secular function  f(lam) = 1 + rho sum_j w_j^2 / (d_j - lam), evaluated
  // at lam = d_base + mu without cancellation near the base.
  double secular(std::size_t base, double mu) const {
    double acc = 1.0;
    for (std::size_t j = 0; j < m_; ++j)
      acc += rho_ * w2_[j] / ((dvals_[j] - dvals_[base]) - mu);
    return acc;
  }

  // Root of the secular equation in (d_i, d_i + width); returns (base, mu).
  // f is strictly increasing there, from -inf at d_i^+ to +inf (interior
  // gaps) or to 1 (above the last level), so bisection is safe.
  void solve_gap(std::size_t i, double width, std::size_t* base, double* mu) const {
    *base = i;
    double lo = 0.0, hi = width; // f(lo^+) = -inf
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (secular(i, mid) < 0.0 ? lo : hi) = mid;
    }
    *mu = 0.5 * (lo + hi);
  }

  void build_eigenbasis() {
    // even-sector couplings: |<even mode_i, e0>|^2 with e0 the unit vector of
    // the origin's band-limited profile; paired modes carry twice the weight
    w2_.assign(m_, 2.0 / double(g_.n));
    w2_[0] = 1.0 / double(g_.n);
    w2_[m_ - 1] = 1.0 / double(g_.n);

    base_.resize(m_);
    mu_.resize(m_);
    lam_.resize(m_);
    for (std::size_t i = 0; i + 1 < m_; ++i)
      solve_gap(i, dvals_[i + 1] - dvals_[i], &base_[i], &mu_[i]);
    solve_gap(m_ - 1, rho_ * 1.0000001 + 1e-12, &base_[m_ - 1], &mu_[m_ - 1]);
    for (std::size_t i = 0; i < m_; ++i) lam_[i] = dvals_[base_[i]] + mu_[i];

    // lam_i - d_j computed through the stored split to avoid cancellation
    auto lam_minus_d = [&](std::size_t i, std::size_t j) {
      return (dvals_[base_[i]] - dvals_[j]) + mu_[i];
    };

    // Gu-Eisenstat: weights recomputed from the converged roots make the
    // analytic eigenvectors of the *recomputed* problem, which is the nearby
    // problem actually solved; orthogonality then holds to round-off.
    //   what_j^2 = prod_i (lam_i - d_j) / (rho prod_{i != j} (d_i - d_j))
    std::vector<double> what(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      double prod = lam_minus_d(j, j) / rho_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == j) continue;
        prod *= lam_minus_d(i, j) / (dvals_[i] - dvals_[j]);
      }
      what[j] = std::sqrt(std::max(prod, 0.0));
    }

    q_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double* row = &q_[i * m_];
      double nrm = 0.0;
      for (std::size_t j = 0; j < m_; ++j) {
        row[j] = what[j] / lam_minus_d(i, j);
        nrm += row[j] * row[j];
      }
      nrm = 1.0 / std::sqrt(nrm);
      for (std::size_t j = 0; j < m_; ++j) row[j] *= nrm;
    }
  }

  Grid g_;
  double alpha_ = 0.0;
  double bare_ = 0.0;
  double rho_ = 0.0;
  std::size_t m_ = 0;
  std::vector<double> dvals_, w2_, lam_, mu_;
  std::vector<std::size_t> base_;
  std::vector<double> q_; // row i = i-th even eigenvector in the k basis
};

} // namespace dcl
