#pragma once

// The nonlinear coordinate change that rides along with the streak: C1 and C2
// are the Y and Z shifts expressed in the moving frame, g is the unknown that
// tracks the time oscillation of the streamwise zero mode, (U1_0 - C1)/t.
// The Jacobian factors of the map are recovered from (C1, C2) by a pointwise
// linear solve, the transformed Laplacian is assembled from those factors,
// and the lab-frame shift psi is recovered by fixed-point inversion of
// Y = y + psi(y, z), Z = z + phi(y, z).
//
// All fields are real-valued and live on the same (Y,Z) sub-grid the streak
// module uses; spectra are Hermitian and the solves are carried out on the
// real physical values.

#include "c3d/common.hpp"
#include "c3d/streak.hpp"

#include <functional>

namespace c3d {

// ============================================================================
// State
// ============================================================================

struct CoordState {
    StreakGrid grid;
    std::vector<cplx> C1, C2, g;   // spectral
    double t = 1.0;
    double nu = 0.0;

    CoordState() = default;
    CoordState(const StreakGrid& gr, double nu_, double t0 = 1.0)
        : grid(gr), C1(gr.size(), cplx(0.0, 0.0)), C2(gr.size(), cplx(0.0, 0.0)),
          g(gr.size(), cplx(0.0, 0.0)), t(t0), nu(nu_) {}
};

// ============================================================================
// Jacobian factors
// ============================================================================

struct JacobianSet {
    std::vector<cplx> psi_y, psi_z, phi_y, phi_z;  // spectral
    std::vector<cplx> G_yy, G_yz, G_zz;            // quadratic combinations
    double min_det = 1.0;   // min over grid of the pointwise system determinant
    double max_grad = 0.0;  // max |dC| over grid and components
};

// Pointwise solve of the chain-rule system
//   (1 - dY C1) psi_y - dZ C1 phi_y = dY C1     (same matrix for the z pair)
//   -dY C2 psi_y + (1 - dZ C2) phi_y = dY C2
// at every physical node, transformed back to spectral space, plus the
// derived quadratic factors G_yy = (1+psi_y)^2 + psi_z^2 - 1 and friends.
// Throws std::runtime_error once any |dC| reaches 1/2 (outside the
// invertibility regime) or the determinant degenerates.
JacobianSet jacobian_from_C(const StreakGrid& g, const std::vector<cplx>& C1,
                            const std::vector<cplx>& C2);

// Max pointwise residual of the four chain-rule identities
// (e.g. psi_y - (1+psi_y) dY C1 - phi_y dZ C1) evaluated on the nodes.
double jacobian_residual(const StreakGrid& g, const std::vector<cplx>& C1,
                         const std::vector<cplx>& C2, const JacobianSet& J);

// ============================================================================
// Transformed Laplacians (X-independent fields)
// ============================================================================

// Delta_t f = dYt(dYt f) + dZt(dZt f) with dYt = (1+psi_y) dY + phi_y dZ and
// dZt = (1+phi_z) dZ + psi_z dY; products dealiased on assembly.
std::vector<cplx> transformed_laplacian(const StreakGrid& g, const JacobianSet& J,
                                        const std::vector<cplx>& f);

// tilde-Delta_t f = Delta_t f - (Delta_t C1) dY f - (Delta_t C2) dZ f,
// the variant whose coefficients close the C-system on itself.
std::vector<cplx> tilde_laplacian(const StreakGrid& g, const JacobianSet& J,
                                  const std::vector<cplx>& C1,
                                  const std::vector<cplx>& C2,
                                  const std::vector<cplx>& f);

// ============================================================================
// Evolution
// ============================================================================

struct U0Fields {
    std::vector<cplx> u1, u2, u3;  // spectral zero-x-frequency velocities
};
using U0Feed = std::function<U0Fields(double t)>;

// One RK4 step of
//   dt C1 + g dY C1 = g - U2_0 + nu tilde-Delta_t C1
//   dt C2 + g dY C2 =   - U3_0 + nu tilde-Delta_t C2
//   dt g  + g dY g  = -2g/t - forcing0/t + nu tilde-Delta_t g
// with the feed sampled at the stage times. forcing0 is the zero-frequency
// quadratic functional (U_neq . grad^t U1_neq)_0; nullptr means zero.
// Throws std::invalid_argument for t < 1 or dt <= 0, std::runtime_error
// (with a time stamp) if invertibility is lost during the step.
CoordState evolve_coord(const CoordState& s, const U0Feed& feed, double dt,
                        const std::vector<cplx>* forcing0 = nullptr);

// ============================================================================
// Lab-frame reconstruction
// ============================================================================

struct LabShift {
    std::vector<cplx> psi, phi;  // spectral, on the lab (y,z) grid
    int iterations = 0;          // worst-case fixed-point count over nodes
};

// Inverts Y = y + psi, Z = z + phi by iterating (a,b) <- (C1, C2)(y+a, z+b)
// per node (tolerance 1e-12, cap 50; std::runtime_error past the cap) with
// off-grid values taken from the exact Fourier sum.
LabShift reconstruct_lab(const CoordState& s);

// Sobolev norm sqrt( (2 pi / Ly) sum <(eta,l)>^{2 sigma} |a|^2 ), the 2D
// companion of the streak module's L2 norm (sigma = 0 reduces to it).
double coord_hnorm(const StreakGrid& g, const std::vector<cplx>& f, double sigma);

// || psi(t) - u1_0(t) || in the above norm, psi reconstructed on the lab grid.
double psi_vs_u1(const CoordState& s, const std::vector<cplx>& u1_0,
                 double sigma = 0.0);

} // namespace c3d
