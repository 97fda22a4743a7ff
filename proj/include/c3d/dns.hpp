#pragma once

// Full nonlinear pseudo-spectral solver for the perturbation of plane Couette
// flow, integrated in the tilted frame X = x - (t - t_remap) y. The advection
// term uses lab-frame gradients realized through the moving wavenumber
// (k, eta - tau k, l); both pressure contributions collapse into a single
// solenoidal projection plus the wavenumber-rotation compensation term; the
// viscous semigroup is applied exactly per mode as an integrating factor.
// Remaps at aligned times fold the accumulated tilt back into the stored
// wavenumbers so the tilt never exceeds one alignment interval.
//
// Alongside the stepper live the diagnostics: Q^i = (lab Laplacian) u^i, the
// zero-frequency forcing functional of the x-averaged momentum equation, the
// weighted-norm series evaluated against the multiplier profiles, and the
// seeded solenoidal initial-data generator.

#include "c3d/common.hpp"
#include "c3d/grid.hpp"
#include "c3d/multiplier.hpp"
#include "c3d/streak.hpp"

#include <array>
#include <cstdint>
#include <functional>

namespace c3d {

// ============================================================================
// State
// ============================================================================

struct DnsState {
    VectorField u;                 // spectral, shear frame, Hermitian, solenoidal
    double t = 0.0;
    double nu = 0.0;
    long long steps = 0;           // accepted steps so far
    int remaps = 0;
    double dropped_energy = 0.0;   // cumulative energy lost at remaps
    int last_halvings = 0;         // CFL halvings used by the latest step

    DnsState() = default;
    DnsState(const GridSpec& g, double nu_) : u(g), nu(nu_) {}
};

// Thrown when a field stops being finite; carries the simulation time.
class BlowupError : public std::runtime_error {
public:
    explicit BlowupError(double t);
    double t() const { return t_; }

private:
    double t_ = 0.0;
};

// ============================================================================
// Stepping
// ============================================================================

// Non-viscous right-hand side at the state's own time: the lab-gradient
// advection product, the lift-up source (-u^2, 0, 0), and the pressure
// handled as one solenoidal projection of the assembled source plus the
// compensation k~ (k u^2)/|k~|^2 that keeps k~ . u constant as the frame
// shears. Throws BlowupError if the input is not finite.
VectorField dns_rhs(const DnsState& s);

// 0.5 * min grid spacing / max pointwise speed (+inf for zero velocity).
double dns_cfl_bound(const DnsState& s);

// One integrating-factor RK4 step of at most dt. The step is first shortened
// to land exactly on the next aligned time (t - t_remap a multiple of Lx/Ly),
// then halved while it violates the CFL bound (std::runtime_error after 10
// halvings). Viscosity enters as the exact per-mode decay over the step.
// Every accepted step ends projected, dealiased, and Hermitian; a step
// landing on an aligned time is remapped there, with any energy pushed off
// the grid accounted into dropped_energy.
DnsState dns_step(const DnsState& s, double dt);

// Step repeatedly (dt as the per-step hint) until t_end, invoking on_step
// after every accepted step.
DnsState dns_advance(DnsState s, double t_end, double dt,
                     const std::function<void(const DnsState&)>& on_step = {});

// ============================================================================
// Diagnostics
// ============================================================================

// Q^i: each coefficient multiplied by the lab Laplacian symbol at the
// state's tilt. The inverse (divide where the symbol is nonzero) recovers u.
VectorField q_fields(const DnsState& s);

// Zero-frequency forcing of the x-averaged momentum equation,
//   F^alpha = -d_y (u^2_neq u^alpha_neq)_0 - d_z (u^3_neq u^alpha_neq)_0,
// alpha in {1,2,3}, returned on the (ny,nz) sub-grid in StreakGrid layout.
// The x average removes the tilt from the outer derivatives, so the result
// is frame-clean; x-independent input gives exactly zero.
std::vector<cplx> forcing_functional(const DnsState& s, int alpha);

// The (ny,nz) sub-grid a box's k = 0 slice lives on.
inline StreakGrid streak_grid_of(const GridSpec& g) {
    return StreakGrid(g.ny, g.nz, g.ly, g.lz, g.dealias);
}

// ============================================================================
// Weighted-norm series
// ============================================================================

// One weight profile per eta-lattice point reachable by t_max: remaps shift
// a stored frequency by t_remap * k, so the covered range is the grid's own
// eta span widened by t_max times the largest in-band |k|.
struct NormProfiles {
    NormParams params;
    GridSpec box;
    double eta_spacing = 0.0;
    double eta_abs_max = 0.0;    // profiles cover [-eta_abs_max, eta_abs_max]
    std::vector<WeightFn> fns;   // index round((eta + eta_abs_max)/spacing)
};

NormProfiles build_norm_profiles(const GridSpec& box, const NormParams& p,
                                 double t_max);

// Profile for one (signed, on-lattice) eta; std::out_of_range if the lattice
// does not cover it.
const WeightFn& profile_for(const NormProfiles& prof, double eta);

struct NormRecord {
    double t = 0.0;
    std::array<double, 3> a_q{};       // ||A^i Q^i||, i = 1,2,3
    std::array<double, 3> anu_q{};     // ||A^{nu;i} Q^i||, i = 1,2,3
    std::vector<double> energy_by_kx;  // kinetic energy per |x-mode|
    double e_neq = 0.0, e_zero = 0.0;  // x-dependent / x-averaged energy
    double u_neq = 0.0, u_zero = 0.0;  // corresponding L2 norms
};

// Evaluates the weighted norms of q_fields(s) against the profiles, indexing
// each stored mode by its original frequency eta + t_remap * k. Throws
// std::invalid_argument on a grid mismatch and std::out_of_range when the
// run has outlived the profile range.
NormRecord norm_series(const DnsState& s, const NormProfiles& prof);

// ============================================================================
// Initial data
// ============================================================================

// Solenoidal random field: complex Gaussian draws per Hermitian mode pair
// under the envelope e^{-lambda (|k|+|eta|+|l|)^s}, projected divergence-free
// at tilt zero, dealiased, mean-free, and rescaled so sqrt(energy) = eps.
// Same seed, same field.
VectorField gevrey_random_field(const GridSpec& g, double eps, double lambda,
                                double s, std::uint64_t seed);

} // namespace c3d
