#pragma once

// Per-mode linearized dynamics in the tilted frame. The unknowns are the
// q^i = Delta u^i coefficients of one Fourier mode e^{i(kX + eta Y + lZ)},
// X = x - t y: the q2 component decouples (pure dissipation), q1 is forced
// by -q2 + 2 dxx u2 and the shear-stretching term, q3 by 2 dzx u2 and its
// stretching term. Velocities are derived (u^i = q^i / symbol), never
// evolved, so the time-dependent symbol is not differentiated.
//
// Also houses the k = 0 closed form (heat semigroup + lift-up) and the rate
// fitting used to extract decay exponents from series.

#include "c3d/common.hpp"
#include "c3d/grid.hpp"

#include <array>
#include <utility>

namespace c3d {

// ============================================================================
// ModeState
// ============================================================================

struct ModeState {
    double k = 0.0, eta = 0.0, l = 0.0;   // tilted-frame wavenumber
    cplx q1{0.0, 0.0}, q2{0.0, 0.0}, q3{0.0, 0.0};
    double t = 0.0;
};

// u^i = q^i / laplacian_l_symbol(k, eta, l, t); zero for the (0,0,0) mode.
std::array<cplx, 3> mode_velocity(const ModeState& s);

// Inverse of mode_velocity: q^i = symbol * u^i at time t.
ModeState mode_from_velocity(double k, double eta, double l, cplx u1, cplx u2,
                             cplx u3, double t);

// Exact integral of (k^2 + (eta - k tau)^2 + l^2) over tau in [a, b] — the
// cubic-in-t antiderivative driving every dissipation factor here.
double visc_integral(double k, double eta, double l, double a, double b);

// One step of classical 4th-order integrating-factor stepping: the viscous
// decay is applied exactly via visc_integral, the couplings explicitly.
ModeState linear_mode_step(const ModeState& s, double nu, double dt);

// min(0.01, 0.1 / max |shear wavenumber| over [s.t, tmax]); stiffness never
// constrains dt because the viscous part is exact.
double default_mode_dt(const ModeState& s, double tmax);

// ============================================================================
// Zero modes (k = 0): exact evolution
// ============================================================================

// Heat semigroup with the lift-up source: for every (eta, l),
//   u1(t) = e^{-nu t (eta^2+l^2)} (u1_in - t u2_in),
//   u2, u3 multiplied by e^{-nu t (eta^2+l^2)}.
// Throws std::invalid_argument if the input carries any k != 0 coefficient.
VectorField zero_mode_evolution(const VectorField& u_in, double nu, double t);

// ============================================================================
// Rate fitting
// ============================================================================

enum class RateModel {
    power_law,   // log v ~ c log t + b        (returns c; needs t > 0, v > 0)
    cubic_exp,   // log v ~ r t^3 + b          (returns r; needs v > 0)
    linear,      // v ~ a t + b                (returns a)
};

struct RateFit {
    double exponent_or_rate = 0.0;
    double residual = 0.0;   // RMS residual in the fitted space
};

// Least-squares fit of a (t, value) series against one regressor + intercept.
// Throws std::invalid_argument on fewer than 8 samples or nonpositive values
// under a log model; degenerate regressors surface as std::runtime_error.
RateFit fit_rates(const std::vector<std::pair<double, double>>& series, RateModel model);

} // namespace c3d
