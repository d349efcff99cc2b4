#pragma once
#include <chrono>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "cm_frame.hpp"
#include "complex_field.hpp"
#include "delta_propagator.hpp"
#include "errors.hpp"
#include "field2d.hpp"
#include "grid.hpp"
#include "packet.hpp"
#include "parallel.hpp"

namespace dcl {

// Text record of one exact-evolution run (all parameters, grid geometry,
// escape-monitor maximum, wall time).
struct RunManifest {
  double eps = 0.0, alpha = 0.0, tau = 0.0;
  double light_delta = 0.0, light_q0 = 0.0, light_r0 = 0.0;
  double heavy_sigma = 0.0, heavy_R0 = 0.0, heavy_P0 = 0.0;
  std::size_t nx = 0, ny = 0;
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  double boundary_mass_max = 0.0;
  double norm = 0.0;
  double wall_ms = 0.0;

  std::string format() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "eps = " << eps << "\n"
       << "alpha = " << alpha << "\n"
       << "tau = " << tau << "\n"
       << "light_delta = " << light_delta << "\n"
       << "light_q0 = " << light_q0 << "\n"
       << "light_r0 = " << light_r0 << "\n"
       << "heavy_sigma = " << heavy_sigma << "\n"
       << "heavy_R0 = " << heavy_R0 << "\n"
       << "heavy_P0 = " << heavy_P0 << "\n"
       << "grid_x = " << nx << " [" << x_min << ", " << x_max << ")\n"
       << "grid_y = " << ny << " [" << y_min << ", " << y_max << ")\n"
       << "boundary_mass_max = " << boundary_mass_max << "\n"
       << "norm = " << norm << "\n"
       << "wall_ms = " << wall_ms << "\n";
    return os.str();
  }
};

// Numerically exact evolution of the two-body problem
//   i d/dtau psi = -1/2 d^2/dR^2 psi + (1/eps)( -1/2 d^2/dr^2 + alpha delta(r-R) ) psi
// for the product initial state (f+ + f-)/sqrt(2) (R) * chi(r).  Solved in
// the (X, y) frame where the generator splits into two commuting unit-mass
// factors (see CMRelativeFrame): free flow in X for time tau/M, and the
// point-interaction propagator in y for time tau/mu with coupling
// alpha/(1+eps).  Both factors are applied by exact spectral/eigenbasis
// phases, so the composition is unitary to round-off at any tau.
class ExactEvolver {
 public:
  ExactEvolver(const AsymptoticParams& p, const Grid& gX, const Grid& gy,
               std::size_t workers = 1)
      : p_(p),
        frame_(p.eps),
        gX_(gX),
        gy_(gy),
        workers_(workers ? workers : 1),
        prop_(gy, frame_.effective_coupling(p.alpha)) {}

  const AsymptoticParams& params() const { return p_; }
  const CMRelativeFrame& frame() const { return frame_; }
  const Grid& grid_x() const { return gX_; }
  const Grid& grid_y() const { return gy_; }
  const DeltaPropagator& propagator() const { return prop_; }

  // escape monitor: reject runs whose mass within `boundary_cells` of any box
  // edge exceeds the threshold (before or after evolution)
  double boundary_threshold = 1e-8;
  std::size_t boundary_cells = 8;

  // psi_0(X, y) = heavy_pair(R(X, y)) * light(r(X, y)); the inverse map is
  // closed-form, so no interpolation ever touches the initial data.
  Field2D initial_state() const {
    Field2D f = make_field2d(gX_, gy_);
    const GaussPacket fp = p_.heavy.plus(), fm = p_.heavy.minus();
    const std::size_t ny = gy_.n;
    parallel_for(gX_.n, workers_, [&](std::size_t ix) {
      const double X = gX_.x(ix);
      cplx* row = &f.a[ix * ny];
      for (std::size_t iy = 0; iy < ny; ++iy) {
        const double y = gy_.x(iy);
        const double R = frame_.R_of(X, y);
        const cplx heavy = (fp.position(R) + fm.position(R)) * kInvSqrt2;
        row[iy] = heavy == cplx(0.0) ? cplx(0.0) : heavy * p_.light.position(frame_.r_of(X, y));
      }
    });
    return f;
  }

  // center-of-mass leg: free spectral flow along X, slow time tau
  void evolve_x(Field2D& f, double tau) const {
    require_grids(f);
    require_finite(tau);
    const double t = frame_.cm_time(tau);
    const std::size_t nx = gX_.n, ny = gy_.n;
    parallel_for(ny, workers_, [&](std::size_t iy) {
      Field col = make_field(gX_);
      for (std::size_t ix = 0; ix < nx; ++ix) col.a[ix] = f.a[ix * ny + iy];
      std::vector<cplx> spec = forward_ft(col);
      for (std::size_t b = 0; b < nx; ++b) {
        const double k = gX_.k(b);
        spec[b] *= phase_factor(-0.5 * k * k * t);
      }
      const Field out = inverse_ft(gX_, spec);
      for (std::size_t ix = 0; ix < nx; ++ix) f.a[ix * ny + iy] = out.a[ix];
    });
  }

  // relative leg: point-interaction flow along y, slow time tau
  void evolve_y(Field2D& f, double tau) const {
    require_grids(f);
    require_finite(tau);
    const double t = frame_.relative_time(tau);
    const std::size_t ny = gy_.n;
    parallel_for(gX_.n, workers_, [&](std::size_t ix) {
      Field row{gy_, std::vector<cplx>(f.a.begin() + ix * ny, f.a.begin() + (ix + 1) * ny)};
      const Field out = prop_.evolve(row, t);
      std::copy(out.a.begin(), out.a.end(), f.a.begin() + ix * ny);
    });
  }

  // full run: sample, evolve both legs, enforce the escape monitor
  Field2D evolve(double tau, RunManifest* manifest = nullptr) const {
    require_finite(tau);
    const auto t0 = std::chrono::steady_clock::now();
    Field2D f = initial_state();
    double bm = boundary_mass(f, boundary_cells);
    evolve_y(f, tau);
    evolve_x(f, tau);
    bm = std::max(bm, boundary_mass(f, boundary_cells));
    const auto t1 = std::chrono::steady_clock::now();
    if (manifest) {
      manifest->eps = p_.eps;
      manifest->alpha = p_.alpha;
      manifest->tau = tau;
      manifest->light_delta = p_.light.delta;
      manifest->light_q0 = p_.light.q0;
      manifest->light_r0 = p_.light.r0;
      manifest->heavy_sigma = p_.heavy.sigma;
      manifest->heavy_R0 = p_.heavy.R0;
      manifest->heavy_P0 = p_.heavy.P0;
      manifest->nx = gX_.n;
      manifest->ny = gy_.n;
      manifest->x_min = gX_.xmin;
      manifest->x_max = gX_.xmax;
      manifest->y_min = gy_.xmin;
      manifest->y_max = gy_.xmax;
      manifest->boundary_mass_max = bm;
      manifest->norm = std::sqrt(norm2(f));
      manifest->wall_ms =
          std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0).count();
    }
    if (bm > boundary_threshold)
      throw numerical_guard("ExactEvolver: boundary mass " + std::to_string(bm) +
                            " exceeds the escape threshold");
    return f;
  }

  // <psi, H psi> with the interaction evaluated through its on-axis rank-one
  // form: (1/mu) [ sum_rows kinetic + alpha_bare |band-limited psi(X, 0)|^2 ]
  // plus the X-leg kinetic term with mass M.
  double energy(const Field2D& f) const {
    require_grids(f);
    const std::size_t nx = gX_.n, ny = gy_.n;
    const double bare = prop_.bare_coupling();
    const double ey = parallel_reduce(nx, workers_, 0.0, [&](std::size_t lo, std::size_t hi) {
      double acc = 0.0;
      for (std::size_t ix = lo; ix < hi; ++ix) {
        Field row{gy_, std::vector<cplx>(f.a.begin() + ix * ny, f.a.begin() + (ix + 1) * ny)};
        const std::vector<cplx> spec = forward_ft(row);
        cplx at0 = 0.0;
        double kin = 0.0;
        for (std::size_t b = 0; b < ny; ++b) {
          const double k = gy_.k(b);
          kin += 0.5 * k * k * std::norm(spec[b]);
          at0 += spec[b];
        }
        at0 *= gy_.dk() / kSqrtTwoPi;
        acc += kin * gy_.dk() + bare * std::norm(at0);
      }
      return acc;
    });
    const double ex = parallel_reduce(ny, workers_, 0.0, [&](std::size_t lo, std::size_t hi) {
      double acc = 0.0;
      for (std::size_t iy = lo; iy < hi; ++iy) {
        Field col = make_field(gX_);
        for (std::size_t ix = 0; ix < nx; ++ix) col.a[ix] = f.a[ix * ny + iy];
        const std::vector<cplx> spec = forward_ft(col);
        double kin = 0.0;
        for (std::size_t b = 0; b < nx; ++b) {
          const double k = gX_.k(b);
          kin += 0.5 * k * k * std::norm(spec[b]);
        }
        acc += kin * gX_.dk();
      }
      return acc;
    });
    return ey * gX_.h() / frame_.reduced_mass() + ex * gy_.h() / frame_.total_mass();
  }

 private:
  static constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

  void require_grids(const Field2D& f) const {
    if (f.gx.n != gX_.n || f.gx.xmin != gX_.xmin || f.gx.xmax != gX_.xmax ||
        f.gy.n != gy_.n || f.gy.xmin != gy_.xmin || f.gy.xmax != gy_.xmax)
      throw config_error("ExactEvolver: field grids do not match the evolver grids");
  }
  static void require_finite(double tau) {
    if (!std::isfinite(tau)) throw config_error("ExactEvolver: time must be finite");
  }

  AsymptoticParams p_;
  CMRelativeFrame frame_;
  Grid gX_, gy_;
  std::size_t workers_;
  DeltaPropagator prop_;
};

// Which closed-form wave to evaluate at the mapped (R, r) points.
enum class ClosedForm { scattering_asymptotic, factorized_exact };

// Sample a closed-form wave on an (X, y) tensor grid through the inverse map.
inline Field2D sample_closed_form(const AsymptoticFields& F, const Grid& gX, const Grid& gy,
                                  ClosedForm which, std::size_t workers = 1) {
  const CMRelativeFrame frame(F.params().eps);
  Field2D f = make_field2d(gX, gy);
  const std::size_t ny = gy.n;
  parallel_for(gX.n, workers, [&](std::size_t ix) {
    const double X = gX.x(ix);
    cplx* row = &f.a[ix * ny];
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double y = gy.x(iy);
      const double R = frame.R_of(X, y);
      const double r = frame.r_of(X, y);
      row[iy] = which == ClosedForm::scattering_asymptotic ? F.psi_a(R, r) : F.psi_e(R, r);
    }
  });
  return f;
}

// L2 distance between an (X, y)-frame field and a closed-form wave evaluated
// pointwise at the mapped coordinates; equals the (r, R)-frame distance by
// the unit Jacobian.  The field and the closed form must share one
// configuration; the caller owns that consistency.
inline double cm_distance(const Field2D& f, const AsymptoticFields& F, ClosedForm which,
                          std::size_t workers = 1) {
  const CMRelativeFrame frame(F.params().eps);
  const std::size_t ny = f.gy.n;
  const double s = parallel_reduce(f.gx.n, workers, 0.0, [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t ix = lo; ix < hi; ++ix) {
      const double X = f.gx.x(ix);
      const cplx* row = &f.a[ix * ny];
      for (std::size_t iy = 0; iy < ny; ++iy) {
        const double y = f.gy.x(iy);
        const double R = frame.R_of(X, y);
        const double r = frame.r_of(X, y);
        const cplx ref =
            which == ClosedForm::scattering_asymptotic ? F.psi_a(R, r) : F.psi_e(R, r);
        acc += std::norm(row[iy] - ref);
      }
    }
    return acc;
  });
  return std::sqrt(s * f.cell());
}

} // namespace dcl
