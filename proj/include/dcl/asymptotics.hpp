#pragma once
#include <cmath>
#include <cstddef>
#include <vector>

#include "bump.hpp"
#include "chirp.hpp"
#include "complex_field.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "packet.hpp"
#include "parallel.hpp"
#include "scattering.hpp"

namespace dcl {

// Physical setup of the heavy/light scattering problem in the slow frame:
// a light packet (mass ratio eps) hits a heavy superposition of two
// counter-propagating Gaussian branches at +-R0, point coupling alpha.
struct AsymptoticParams {
  LightPacket light;
  HeavyPair heavy;
  double alpha = 0.0;
  double eps = 0.1;
  double tau = 1.0;

  double t_fast() const { return tau / eps; } // light-particle clock
};

// Small-mass-ratio closed forms for the post-scattering two-body wave at slow
// time tau, on the (R, r) = (heavy, light) plane.  With k = r / t_fast and
// pref(r) = e^{-i pi/4} t_fast^{-1/2} e^{i r^2/(2 t_fast)}:
//
//   psi_a = pref/sqrt(2) { A(k) [P+ + P-](R) + B(k) [Q+ + Q-](R, k) }
//     A(k) = trans(k) gd(k)     for k > 0,   gd(k)            for k <= 0
//     B(k) = refl(k) gd(-k)     for k <= 0,  0                for k > 0
//
//   psi_e = 1/sqrt(2) { P+(R) [gT + gRef(-R0)](r) + P-(R) [gT + gRef(+R0)](r) }
//     gT(r)     = trans(k) pref(r) gd(k)
//     gRef_x(r) = refl(k) e^{-2 i x k} pref(r) gd(-k)
//
// where gd is the light packet's momentum amplitude, P+- are the freely
// evolved heavy branches and Q+- their momentum-kicked counterparts.  The
// difference decomposes exactly (using 1 - trans = -refl) as
//   psi_a - psi_e = zeta1 + zeta2 + zeta3,
//   zeta1 = -pref/sqrt(2) refl(k) [ gd(k) 1_{k<=0} (P+ + P-) + gd(-k) 1_{k>0} (Q+ + Q-) ]
//   zeta2 =  pref/sqrt(2) refl(k) gd(-k) [ Q+ - P+ e^{+2 i R0 k} ]
//   zeta3 =  pref/sqrt(2) refl(k) gd(-k) [ Q- - P- e^{-2 i R0 k} ]
// with norm bounds ||zeta1||^2 <= 2 * tail2(delta q0) and
// ||zeta2||, ||zeta3|| <= sqrt(2) sigma alpha.
class AsymptoticFields {
 public:
  explicit AsymptoticFields(const AsymptoticParams& p)
      : p_(p),
        amps_{p.alpha},
        table_plus_(p.heavy.plus(), p.tau),
        table_minus_(p.heavy.minus(), p.tau) {
    if (!(p.eps > 0.0) || !(p.tau > 0.0)) throw config_error("asymptotics: eps and tau must be positive");
    if (p.alpha < 0.0) throw config_error("asymptotics: alpha must be nonnegative");
  }

  const AsymptoticParams& params() const { return p_; }
  const DeltaAmplitudes& amplitudes() const { return amps_; }

  double k_of(double r) const { return r / p_.t_fast(); }
  cplx pref(double r) const { return chirp_prefactor(p_.t_fast(), r); }
  cplx gd(double k) const { return p_.light.ft(k); }

  cplx P_plus(double R) const { return table_plus_.evolved(R); }
  cplx P_minus(double R) const { return table_minus_.evolved(R); }
  cplx Q_plus(double R, double k) const { return table_plus_.kicked(R, k); }
  cplx Q_minus(double R, double k) const { return table_minus_.kicked(R, k); }

  cplx A_coef(double k) const {
    return k > 0.0 ? amps_.trans(k) * gd(k) : gd(k);
  }
  cplx B_coef(double k) const {
    return k > 0.0 ? cplx(0.0) : amps_.refl(k) * gd(-k);
  }

  // r-side channel functions of the factorized form psi_e
  cplx channel_trans(double r) const {
    const double k = k_of(r);
    return amps_.trans(k) * pref(r) * gd(k);
  }
  cplx channel_refl(double r, double mirror_center) const {
    const double k = k_of(r);
    return amps_.refl(k) * phase_factor(-2.0 * mirror_center * k) * pref(r) * gd(-k);
  }
  cplx channel_plus(double r) const { return channel_trans(r) + channel_refl(r, -p_.heavy.R0); }
  cplx channel_minus(double r) const { return channel_trans(r) + channel_refl(r, +p_.heavy.R0); }

  cplx psi_a(double R, double r) const {
    const double k = k_of(r);
    const cplx P = P_plus(R) + P_minus(R);
    const cplx B = B_coef(k);
    cplx acc = A_coef(k) * P;
    if (B != cplx(0.0)) acc += B * (Q_plus(R, k) + Q_minus(R, k));
    return kInvSqrt2 * pref(r) * acc;
  }

  cplx psi_e(double R, double r) const {
    return kInvSqrt2 * (P_plus(R) * channel_plus(r) + P_minus(R) * channel_minus(r));
  }

  cplx zeta1(double R, double r) const {
    const double k = k_of(r);
    const cplx body = k > 0.0 ? gd(-k) * (Q_plus(R, k) + Q_minus(R, k))
                              : gd(k) * (P_plus(R) + P_minus(R));
    return -kInvSqrt2 * pref(r) * amps_.refl(k) * body;
  }
  cplx zeta2(double R, double r) const {
    const double k = k_of(r);
    return kInvSqrt2 * pref(r) * amps_.refl(k) * gd(-k) *
           (Q_plus(R, k) - P_plus(R) * phase_factor(+2.0 * p_.heavy.R0 * k));
  }
  cplx zeta3(double R, double r) const {
    const double k = k_of(r);
    return kInvSqrt2 * pref(r) * amps_.refl(k) * gd(-k) *
           (Q_minus(R, k) - P_minus(R) * phase_factor(-2.0 * p_.heavy.R0 * k));
  }

 private:
  static constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

  AsymptoticParams p_;
  DeltaAmplitudes amps_;
  FreeEvolutionTable table_plus_;
  FreeEvolutionTable table_minus_;
};

// Streamed lattice audit of the closed forms over gR x gr: the exact
// decomposition residual, term norms, and their a-priori bounds.
struct Prop2Audit {
  double resid_max = 0.0;     // max |(psi_a - psi_e) - (z1 + z2 + z3)|
  double field_max = 0.0;     // max |psi_a|
  double l2_psi_a = 0.0;      // lattice L2 norms
  double l2_psi_e = 0.0;
  double l2_diff = 0.0;       // ||psi_a - psi_e||
  double l2_z1 = 0.0;
  double l2_z2 = 0.0;
  double l2_z3 = 0.0;
  double bound_z1 = 0.0;      // sqrt(2 * tail2(delta q0))
  double bound_z23 = 0.0;     // sqrt(2) sigma alpha
};

namespace detail {
struct AuditAcc {
  double s_a = 0.0, s_e = 0.0, s_d = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  double m_resid = 0.0, m_field = 0.0;
  AuditAcc operator+(const AuditAcc& o) const {
    AuditAcc r;
    r.s_a = s_a + o.s_a;
    r.s_e = s_e + o.s_e;
    r.s_d = s_d + o.s_d;
    r.s1 = s1 + o.s1;
    r.s2 = s2 + o.s2;
    r.s3 = s3 + o.s3;
    r.m_resid = m_resid > o.m_resid ? m_resid : o.m_resid;
    r.m_field = m_field > o.m_field ? m_field : o.m_field;
    return r;
  }
};
} // namespace detail

inline Prop2Audit audit_prop2(const AsymptoticFields& F, const Grid& gR, const Grid& gr,
                              std::size_t workers) {
  // heavy-branch rows are shared by every light row: evaluate them once
  std::vector<cplx> Pp(gR.n), Pm(gR.n);
  for (std::size_t j = 0; j < gR.n; ++j) {
    Pp[j] = F.P_plus(gR.x(j));
    Pm[j] = F.P_minus(gR.x(j));
  }
  const double R0 = F.params().heavy.R0;
  const cplx inv_sqrt2 = cplx(0.70710678118654752440084436210485);

  auto acc = parallel_reduce(gr.n, workers, detail::AuditAcc{}, [&](std::size_t lo, std::size_t hi) {
    detail::AuditAcc a;
    for (std::size_t i = lo; i < hi; ++i) {
      const double r = gr.x(i);
      const double k = F.k_of(r);
      const cplx pf = F.pref(r) * inv_sqrt2;
      const cplx Ak = F.A_coef(k) * pf;
      const cplx Bk = F.B_coef(k) * pf;
      const cplx refl = F.amplitudes().refl(k);
      const cplx z1gP = k > 0.0 ? cplx(0.0) : -pf * refl * F.gd(k);
      const cplx z1gQ = k > 0.0 ? -pf * refl * F.gd(-k) : cplx(0.0);
      const cplx z23g = pf * refl * F.gd(-k);
      const cplx chp = F.channel_plus(r) * inv_sqrt2;
      const cplx chm = F.channel_minus(r) * inv_sqrt2;
      const cplx eP = phase_factor(+2.0 * R0 * k);
      const cplx eM = phase_factor(-2.0 * R0 * k);
      for (std::size_t j = 0; j < gR.n; ++j) {
        const double R = gR.x(j);
        const cplx qp = F.Q_plus(R, k);
        const cplx qm = F.Q_minus(R, k);
        const cplx psum = Pp[j] + Pm[j];
        const cplx psi_a = Ak * psum + Bk * (qp + qm);
        const cplx psi_e = chp * Pp[j] + chm * Pm[j];
        const cplx z1 = z1gP * psum + z1gQ * (qp + qm);
        const cplx z2 = z23g * (qp - Pp[j] * eP);
        const cplx z3 = z23g * (qm - Pm[j] * eM);
        const cplx d = psi_a - psi_e;
        const double resid = std::abs(d - z1 - z2 - z3);
        a.s_a += std::norm(psi_a);
        a.s_e += std::norm(psi_e);
        a.s_d += std::norm(d);
        a.s1 += std::norm(z1);
        a.s2 += std::norm(z2);
        a.s3 += std::norm(z3);
        if (resid > a.m_resid) a.m_resid = resid;
        const double am = std::abs(psi_a);
        if (am > a.m_field) a.m_field = am;
      }
    }
    return a;
  });

  const double cell = gR.h() * gr.h();
  Prop2Audit out;
  out.resid_max = acc.m_resid;
  out.field_max = acc.m_field;
  out.l2_psi_a = std::sqrt(acc.s_a * cell);
  out.l2_psi_e = std::sqrt(acc.s_e * cell);
  out.l2_diff = std::sqrt(acc.s_d * cell);
  out.l2_z1 = std::sqrt(acc.s1 * cell);
  out.l2_z2 = std::sqrt(acc.s2 * cell);
  out.l2_z3 = std::sqrt(acc.s3 * cell);
  const AsymptoticParams& p = F.params();
  out.bound_z1 = std::sqrt(2.0 * bump().ft_tail2(p.light.delta * p.light.q0));
  out.bound_z23 = std::sqrt(2.0) * p.heavy.sigma * p.alpha;
  return out;
}

} // namespace dcl
