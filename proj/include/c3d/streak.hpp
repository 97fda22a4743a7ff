#pragma once

// 2.5-dimensional streak dynamics: 2D Navier-Stokes/Euler in (y,z) driving
// (u2,u3) through the scalar vorticity omega = dy u3 - dz u2, plus the forced
// advection-diffusion equation for the streamwise component u1 whose -u2
// source is the lift-up mechanism. Velocities are recovered from omega by the
// streamfunction solve Delta psi = omega, u2 = -dz psi, u3 = +dy psi, so they
// are divergence-free by construction.
//
// The fields live on the (Ny,Nz) sub-grid of the 3D box (same mode layout,
// y outer / z inner), which keeps restriction to and from the k = 0 slice of
// a 3D run coefficient-exact.

#include "c3d/common.hpp"
#include "c3d/grid.hpp"

namespace c3d {

// ============================================================================
// 2D grid
// ============================================================================

struct StreakGrid {
    int ny = 0, nz = 0;                    // even, >= 4
    double ly = 4.0 * pi;
    double lz = 2.0 * pi;
    double dealias = 2.0 / 3.0;

    StreakGrid() = default;
    StreakGrid(int ny_, int nz_, double ly_ = 4.0 * pi, double lz_ = 2.0 * pi,
               double dealias_ = 2.0 / 3.0);

    std::size_t size() const { return std::size_t(ny) * nz; }
    std::size_t idx(int iy, int iz) const { return std::size_t(iy) * nz + iz; }
    double eta(int iy) const { return 2.0 * pi * GridSpec::mode_of(iy, ny) / ly; }
    double kz(int iz) const { return 2.0 * pi * GridSpec::mode_of(iz, nz) / lz; }
    bool in_dealias_band(int iy, int iz) const;
};

// ============================================================================
// State
// ============================================================================

struct StreakState {
    StreakGrid grid;
    std::vector<cplx> omega;   // spectral vorticity, mean mode kept at zero
    std::vector<cplx> u1;      // spectral streamwise velocity
    double t = 0.0;
    double nu = 0.0;

    StreakState() = default;
    StreakState(const StreakGrid& g, double nu_)
        : grid(g), omega(g.size(), cplx(0.0, 0.0)), u1(g.size(), cplx(0.0, 0.0)),
          nu(nu_) {}
};

struct StreakRhs {
    std::vector<cplx> domega, du1;
};

// ============================================================================
// Operations
// ============================================================================

// (u2, u3) spectral coefficients from the vorticity (streamfunction solve).
void streak_velocity(const StreakGrid& g, const std::vector<cplx>& omega,
                     std::vector<cplx>& u2, std::vector<cplx>& u3);

// dy u3 - dz u2 (inverse of streak_velocity up to the discarded mean).
std::vector<cplx> vorticity_of(const StreakGrid& g, const std::vector<cplx>& u2,
                               const std::vector<cplx>& u3);

// Full right-hand side: domega = -(u2,u3).grad omega + nu Delta omega,
// du1 = -(u2,u3).grad u1 - u2 + nu Delta u1.
StreakRhs streak_rhs(const StreakState& s);

// Classical 4th-order step with the dissipation applied exactly as an
// integrating factor (the grid does not shear at k = 0, so the factor is a
// plain e^{-nu m^2 dt} per mode).
StreakState streak_step(const StreakState& s, double dt);

// L2 norm of one spectral field and the quadratic invariants, all with the
// same (2 pi / Ly) measure the 3D norms carry so embeddings compare 1:1.
double streak_l2(const StreakGrid& g, const std::vector<cplx>& f);
double streak_energy(const StreakState& s);      // ||(u2,u3)||^2
double streak_enstrophy(const StreakState& s);   // ||omega||^2

// ============================================================================
// 3D embedding
// ============================================================================

// Plant the streak into the k = 0 slice of an (nx, ny, nz) box; all k != 0
// coefficients are zero. Requires matching (ny, nz, ly, lz).
VectorField embed_streak(const StreakState& s, const GridSpec& box);

// Extract the k = 0 slice of a 3D field as a streak state.
StreakState restrict_to_streak(const VectorField& v, double nu);

} // namespace c3d
