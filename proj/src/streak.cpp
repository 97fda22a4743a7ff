#include "c3d/streak.hpp"

#include <algorithm>
#include <cmath>

namespace c3d {

StreakGrid::StreakGrid(int ny_, int nz_, double ly_, double lz_, double dealias_)
    : ny(ny_), nz(nz_), ly(ly_), lz(lz_), dealias(dealias_) {
    auto bad = [](const std::string& m) { throw std::invalid_argument("StreakGrid: " + m); };
    if (ny <= 0 || nz <= 0 || ny % 2 || nz % 2)
        bad("dimensions must be positive and even");
    if (!(ly > 0.0) || !(lz > 0.0)) bad("box lengths must be positive");
    if (!(dealias > 0.0) || dealias > 1.0) bad("dealias fraction must lie in (0,1]");
}

bool StreakGrid::in_dealias_band(int iy, int iz) const {
    const double tol = 1e-9;
    return std::abs(GridSpec::mode_of(iy, ny)) <= dealias * ny / 2.0 + tol &&
           std::abs(GridSpec::mode_of(iz, nz)) <= dealias * nz / 2.0 + tol;
}

namespace {

void dealias2(const StreakGrid& g, std::vector<cplx>& f) {
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz)
            if (!g.in_dealias_band(iy, iz)) f[g.idx(iy, iz)] = cplx(0.0, 0.0);
}

std::vector<cplx> to_phys2(const StreakGrid& g, const std::vector<cplx>& spec) {
    std::vector<cplx> out(g.size());
    dft_any({g.ny, g.nz}, spec.data(), out.data(), /*forward=*/false);
    return out;
}

std::vector<cplx> to_spec2(const StreakGrid& g, const std::vector<cplx>& phys) {
    std::vector<cplx> out(g.size());
    dft_any({g.ny, g.nz}, phys.data(), out.data(), /*forward=*/true);
    const double inv = 1.0 / double(g.size());
    for (auto& c : out) c *= inv;
    return out;
}

// -(u2,u3).grad f, pseudo-spectral, dealiased.
std::vector<cplx> advect(const StreakGrid& g, const std::vector<cplx>& u2p,
                         const std::vector<cplx>& u3p, const std::vector<cplx>& f) {
    std::vector<cplx> fy(g.size()), fz(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
            const std::size_t i = g.idx(iy, iz);
            fy[i] = cplx(0.0, g.eta(iy)) * f[i];
            fz[i] = cplx(0.0, g.kz(iz)) * f[i];
        }
    const auto fyp = to_phys2(g, fy), fzp = to_phys2(g, fz);
    std::vector<cplx> prod(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        prod[i] = -(u2p[i] * fyp[i] + u3p[i] * fzp[i]);
    auto out = to_spec2(g, prod);
    dealias2(g, out);
    return out;
}

// Inviscid part of the dynamics: advection for omega, advection plus the
// lift-up source -u2 for u1. The u2 spectral field is returned too since the
// stepper's callers keep reusing it.
StreakRhs inviscid_rhs(const StreakGrid& g, const std::vector<cplx>& omega,
                       const std::vector<cplx>& u1) {
    std::vector<cplx> u2, u3;
    streak_velocity(g, omega, u2, u3);
    const auto u2p = to_phys2(g, u2), u3p = to_phys2(g, u3);
    StreakRhs r;
    r.domega = advect(g, u2p, u3p, omega);
    r.du1 = advect(g, u2p, u3p, u1);
    for (std::size_t i = 0; i < g.size(); ++i) r.du1[i] -= u2[i];
    return r;
}

} // namespace

void streak_velocity(const StreakGrid& g, const std::vector<cplx>& omega,
                     std::vector<cplx>& u2, std::vector<cplx>& u3) {
    u2.assign(g.size(), cplx(0.0, 0.0));
    u3.assign(g.size(), cplx(0.0, 0.0));
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
            const double eta = g.eta(iy), l = g.kz(iz);
            const double m2 = eta * eta + l * l;
            if (m2 == 0.0) continue;   // mean flow carries no vorticity
            const std::size_t i = g.idx(iy, iz);
            // psi = -omega/m2, u2 = -dz psi, u3 = +dy psi
            u2[i] = cplx(0.0, l / m2) * omega[i];
            u3[i] = cplx(0.0, -eta / m2) * omega[i];
        }
}

std::vector<cplx> vorticity_of(const StreakGrid& g, const std::vector<cplx>& u2,
                               const std::vector<cplx>& u3) {
    std::vector<cplx> w(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
            const std::size_t i = g.idx(iy, iz);
            w[i] = cplx(0.0, g.eta(iy)) * u3[i] - cplx(0.0, g.kz(iz)) * u2[i];
        }
    return w;
}

StreakRhs streak_rhs(const StreakState& s) {
    StreakRhs r = inviscid_rhs(s.grid, s.omega, s.u1);
    for (int iy = 0; iy < s.grid.ny; ++iy)
        for (int iz = 0; iz < s.grid.nz; ++iz) {
            const double eta = s.grid.eta(iy), l = s.grid.kz(iz);
            const double m2 = eta * eta + l * l;
            const std::size_t i = s.grid.idx(iy, iz);
            r.domega[i] -= s.nu * m2 * s.omega[i];
            r.du1[i] -= s.nu * m2 * s.u1[i];
        }
    return r;
}

StreakState streak_step(const StreakState& s, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("streak_step: dt must be > 0");
    const StreakGrid& g = s.grid;
    const std::size_t n = g.size();

    std::vector<double> ehalf(n);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
            const double eta = g.eta(iy), l = g.kz(iz);
            ehalf[g.idx(iy, iz)] = std::exp(-s.nu * (eta * eta + l * l) * 0.5 * dt);
        }

    const StreakRhs k1 = inviscid_rhs(g, s.omega, s.u1);

    std::vector<cplx> w2(n), v2(n);
    for (std::size_t i = 0; i < n; ++i) {
        w2[i] = ehalf[i] * (s.omega[i] + 0.5 * dt * k1.domega[i]);
        v2[i] = ehalf[i] * (s.u1[i] + 0.5 * dt * k1.du1[i]);
    }
    const StreakRhs k2 = inviscid_rhs(g, w2, v2);

    std::vector<cplx> w3(n), v3(n);
    for (std::size_t i = 0; i < n; ++i) {
        w3[i] = ehalf[i] * s.omega[i] + 0.5 * dt * k2.domega[i];
        v3[i] = ehalf[i] * s.u1[i] + 0.5 * dt * k2.du1[i];
    }
    const StreakRhs k3 = inviscid_rhs(g, w3, v3);

    std::vector<cplx> w4(n), v4(n);
    for (std::size_t i = 0; i < n; ++i) {
        w4[i] = ehalf[i] * (ehalf[i] * s.omega[i] + dt * k3.domega[i]);
        v4[i] = ehalf[i] * (ehalf[i] * s.u1[i] + dt * k3.du1[i]);
    }
    const StreakRhs k4 = inviscid_rhs(g, w4, v4);

    StreakState r = s;
    r.t = s.t + dt;
    for (std::size_t i = 0; i < n; ++i) {
        const double ef = ehalf[i] * ehalf[i];
        r.omega[i] = ef * s.omega[i] +
                     dt / 6.0 *
                         (ef * k1.domega[i] + 2.0 * ehalf[i] * (k2.domega[i] + k3.domega[i]) +
                          k4.domega[i]);
        r.u1[i] = ef * s.u1[i] +
                  dt / 6.0 *
                      (ef * k1.du1[i] + 2.0 * ehalf[i] * (k2.du1[i] + k3.du1[i]) +
                       k4.du1[i]);
    }
    dealias2(g, r.omega);
    dealias2(g, r.u1);
    return r;
}

double streak_l2(const StreakGrid& g, const std::vector<cplx>& f) {
    double s = 0.0;
    for (const cplx& c : f) s += std::norm(c);
    return std::sqrt(2.0 * pi / g.ly * s);
}

double streak_energy(const StreakState& s) {
    std::vector<cplx> u2, u3;
    streak_velocity(s.grid, s.omega, u2, u3);
    return sq(streak_l2(s.grid, u2)) + sq(streak_l2(s.grid, u3));
}

double streak_enstrophy(const StreakState& s) {
    return sq(streak_l2(s.grid, s.omega));
}

VectorField embed_streak(const StreakState& s, const GridSpec& box) {
    if (box.ny != s.grid.ny || box.nz != s.grid.nz || box.ly != s.grid.ly ||
        box.lz != s.grid.lz)
        throw std::invalid_argument("embed_streak: (ny,nz) slice mismatch");
    std::vector<cplx> u2, u3;
    streak_velocity(s.grid, s.omega, u2, u3);
    VectorField v(box);
    const int ix0 = GridSpec::index_of(0, box.nx);
    for (int iy = 0; iy < box.ny; ++iy)
        for (int iz = 0; iz < box.nz; ++iz) {
            const std::size_t i = s.grid.idx(iy, iz);
            v[0].at(ix0, iy, iz) = s.u1[i];
            v[1].at(ix0, iy, iz) = u2[i];
            v[2].at(ix0, iy, iz) = u3[i];
        }
    return v;
}

StreakState restrict_to_streak(const VectorField& v, double nu) {
    const GridSpec& g3 = v.spec();
    StreakState s(StreakGrid(g3.ny, g3.nz, g3.ly, g3.lz, g3.dealias), nu);
    const int ix0 = GridSpec::index_of(0, g3.nx);
    std::vector<cplx> u2(s.grid.size()), u3(s.grid.size());
    for (int iy = 0; iy < g3.ny; ++iy)
        for (int iz = 0; iz < g3.nz; ++iz) {
            const std::size_t i = s.grid.idx(iy, iz);
            s.u1[i] = v[0].at(ix0, iy, iz);
            u2[i] = v[1].at(ix0, iy, iz);
            u3[i] = v[2].at(ix0, iy, iz);
        }
    s.omega = vorticity_of(s.grid, u2, u3);
    return s;
}

} // namespace c3d
