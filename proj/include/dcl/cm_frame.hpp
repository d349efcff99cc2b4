#pragma once
#include "errors.hpp"

namespace dcl {

// Center-of-mass / relative coordinates for the two-body Hamiltonian in the
// slow frame,
//   H = -1/2 d^2/dR^2 + (1/eps)( -1/2 d^2/dr^2 + alpha delta(r - R) ),
// i.e. masses 1 (heavy, at R) and eps (light, at r) with the light particle's
// internal clock sped up by 1/eps.  With
//   X = (R + eps r) / (1 + eps),   y = r - R,
// the Hamiltonian separates exactly:
//   H = -1/(2M) d^2/dX^2  +  (1/mu)( -1/2 d^2/dy^2 + alpha_rel delta(y) ),
//   M = 1 + eps,   mu = eps / (1 + eps),   alpha_rel = mu (alpha/eps) = alpha / (1 + eps).
// Both factors are unit-mass problems run on rescaled clocks: the X factor
// for time tau / M, the y factor for time tau / mu.  The linear map has unit
// Jacobian, so L2 norms and distances agree between the (r, R) and (X, y)
// frames.  Inverse map: R = X - mu y,  r = X + y / (1 + eps).
struct CMRelativeFrame {
  double eps;

  explicit CMRelativeFrame(double eps_) : eps(eps_) {
    if (!(eps > 0.0)) throw config_error("CMRelativeFrame: mass ratio must be positive");
  }

  double total_mass() const { return 1.0 + eps; }
  double reduced_mass() const { return eps / (1.0 + eps); }
  double effective_coupling(double alpha) const { return alpha / (1.0 + eps); }

  // unit-mass clock equivalents of slow time tau for the two factors
  double cm_time(double tau) const { return tau / total_mass(); }
  double relative_time(double tau) const { return tau / reduced_mass(); }

  double X_of(double R, double r) const { return (R + eps * r) / (1.0 + eps); }
  double y_of(double R, double r) const { return r - R; }
  double R_of(double X, double y) const { return X - reduced_mass() * y; }
  double r_of(double X, double y) const { return X + y / (1.0 + eps); }
};

} // namespace dcl
