#include "c3d/coords.hpp"

#include <algorithm>
#include <cmath>

namespace c3d {

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

std::vector<cplx> deriv_y(const StreakGrid& g, const std::vector<cplx>& f) {
    std::vector<cplx> out(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz)
            out[g.idx(iy, iz)] = cplx(0.0, g.eta(iy)) * f[g.idx(iy, iz)];
    return out;
}

std::vector<cplx> deriv_z(const StreakGrid& g, const std::vector<cplx>& f) {
    std::vector<cplx> out(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz)
            out[g.idx(iy, iz)] = cplx(0.0, g.kz(iz)) * f[g.idx(iy, iz)];
    return out;
}

// Physical real parts of the four gradients of (C1, C2).
struct GradC {
    std::vector<double> c1y, c1z, c2y, c2z;
};

GradC grad_phys(const StreakGrid& g, const std::vector<cplx>& C1,
                const std::vector<cplx>& C2) {
    GradC d;
    auto take = [&](const std::vector<cplx>& spec) {
        const auto p = to_phys2(g, spec);
        std::vector<double> r(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) r[i] = p[i].real();
        return r;
    };
    d.c1y = take(deriv_y(g, C1));
    d.c1z = take(deriv_z(g, C1));
    d.c2y = take(deriv_y(g, C2));
    d.c2z = take(deriv_z(g, C2));
    return d;
}

// The transformed first derivatives dYt f = (1+psi_y) dY f + phi_y dZ f and
// dZt f = (1+phi_z) dZ f + psi_z dY f, using pre-converted physical factors.
struct JacPhys {
    std::vector<cplx> psi_y, psi_z, phi_y, phi_z;
};

JacPhys jac_phys(const StreakGrid& g, const JacobianSet& J) {
    return {to_phys2(g, J.psi_y), to_phys2(g, J.psi_z), to_phys2(g, J.phi_y),
            to_phys2(g, J.phi_z)};
}

std::vector<cplx> dyt(const StreakGrid& g, const JacPhys& jp,
                      const std::vector<cplx>& f) {
    const auto fy = to_phys2(g, deriv_y(g, f)), fz = to_phys2(g, deriv_z(g, f));
    std::vector<cplx> prod(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        prod[i] = (1.0 + jp.psi_y[i]) * fy[i] + jp.phi_y[i] * fz[i];
    auto out = to_spec2(g, prod);
    dealias2(g, out);
    return out;
}

std::vector<cplx> dzt(const StreakGrid& g, const JacPhys& jp,
                      const std::vector<cplx>& f) {
    const auto fy = to_phys2(g, deriv_y(g, f)), fz = to_phys2(g, deriv_z(g, f));
    std::vector<cplx> prod(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        prod[i] = (1.0 + jp.phi_z[i]) * fz[i] + jp.psi_z[i] * fy[i];
    auto out = to_spec2(g, prod);
    dealias2(g, out);
    return out;
}

std::vector<cplx> laplacian_t(const StreakGrid& g, const JacPhys& jp,
                              const std::vector<cplx>& f) {
    const auto a = dyt(g, jp, dyt(g, jp, f));
    const auto b = dzt(g, jp, dzt(g, jp, f));
    std::vector<cplx> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

// tilde-Delta_t with the two Delta_t C corrections already assembled.
std::vector<cplx> tilde_from_parts(const StreakGrid& g, const JacPhys& jp,
                                   const std::vector<cplx>& ltC1p,
                                   const std::vector<cplx>& ltC2p,
                                   const std::vector<cplx>& f) {
    auto out = laplacian_t(g, jp, f);
    const auto fy = to_phys2(g, deriv_y(g, f)), fz = to_phys2(g, deriv_z(g, f));
    std::vector<cplx> corr(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        corr[i] = ltC1p[i] * fy[i] + ltC2p[i] * fz[i];
    auto corr_s = to_spec2(g, corr);
    dealias2(g, corr_s);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] -= corr_s[i];
    return out;
}

// Direct Fourier evaluation of a spectral field at an arbitrary point.
cplx eval_at(const StreakGrid& g, const std::vector<cplx>& spec, double y,
             double z) {
    std::vector<cplx> ey(g.ny), ez(g.nz);
    for (int iy = 0; iy < g.ny; ++iy)
        ey[iy] = std::polar(1.0, g.eta(iy) * y);
    for (int iz = 0; iz < g.nz; ++iz)
        ez[iz] = std::polar(1.0, g.kz(iz) * z);
    cplx sum(0.0, 0.0);
    for (int iy = 0; iy < g.ny; ++iy) {
        cplx row(0.0, 0.0);
        for (int iz = 0; iz < g.nz; ++iz) row += spec[g.idx(iy, iz)] * ez[iz];
        sum += ey[iy] * row;
    }
    return sum;
}

} // namespace

// ============================================================================
// Jacobian factors
// ============================================================================

JacobianSet jacobian_from_C(const StreakGrid& g, const std::vector<cplx>& C1,
                            const std::vector<cplx>& C2) {
    if (C1.size() != g.size() || C2.size() != g.size())
        throw std::invalid_argument("jacobian_from_C: field size does not match grid");
    const GradC d = grad_phys(g, C1, C2);

    double max_grad = 0.0, min_det = 1e300;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (double v : {d.c1y[i], d.c1z[i], d.c2y[i], d.c2z[i]})
            max_grad = std::max(max_grad, std::abs(v));
        min_det = std::min(min_det, (1.0 - d.c1y[i]) * (1.0 - d.c2z[i]) -
                                        d.c1z[i] * d.c2y[i]);
    }
    if (max_grad >= 0.5 || min_det <= 1e-12)
        throw std::runtime_error(
            "jacobian_from_C: transform outside invertibility regime (max |dC| = " +
            std::to_string(max_grad) + ", min det = " + std::to_string(min_det) + ")");

    std::vector<double> py(g.size()), pz(g.size()), fy(g.size()), fz(g.size());
    std::vector<double> gyy(g.size()), gyz(g.size()), gzz(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = d.c1y[i], b = d.c1z[i], c = d.c2y[i], e = d.c2z[i];
        const double det = (1.0 - a) * (1.0 - e) - b * c;
        // Both 2x2 systems share the matrix [[1-a, -b], [-c, 1-e]]; the
        // right-hand sides are the Y and Z gradient columns.
        py[i] = ((1.0 - e) * a + b * c) / det;
        fy[i] = ((1.0 - a) * c + c * a) / det;
        pz[i] = ((1.0 - e) * b + b * e) / det;
        fz[i] = ((1.0 - a) * e + c * b) / det;
        gyy[i] = (1.0 + py[i]) * (1.0 + py[i]) + pz[i] * pz[i] - 1.0;
        gyz[i] = 2.0 * fy[i] * (1.0 + py[i]) + 2.0 * pz[i] * (1.0 + fz[i]);
        gzz[i] = (1.0 + fz[i]) * (1.0 + fz[i]) + fy[i] * fy[i] - 1.0;
    }

    auto lift = [&](const std::vector<double>& r) {
        std::vector<cplx> p(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) p[i] = cplx(r[i], 0.0);
        return to_spec2(g, p);
    };
    JacobianSet J;
    J.psi_y = lift(py);
    J.psi_z = lift(pz);
    J.phi_y = lift(fy);
    J.phi_z = lift(fz);
    J.G_yy = lift(gyy);
    J.G_yz = lift(gyz);
    J.G_zz = lift(gzz);
    J.min_det = min_det;
    J.max_grad = max_grad;
    return J;
}

double jacobian_residual(const StreakGrid& g, const std::vector<cplx>& C1,
                         const std::vector<cplx>& C2, const JacobianSet& J) {
    const GradC d = grad_phys(g, C1, C2);
    const JacPhys jp = jac_phys(g, J);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double py = jp.psi_y[i].real(), pz = jp.psi_z[i].real();
        const double fy = jp.phi_y[i].real(), fz = jp.phi_z[i].real();
        const double r[4] = {
            py - (1.0 + py) * d.c1y[i] - fy * d.c1z[i],
            pz - (1.0 + fz) * d.c1z[i] - pz * d.c1y[i],
            fy - (1.0 + py) * d.c2y[i] - fy * d.c2z[i],
            fz - (1.0 + fz) * d.c2z[i] - pz * d.c2y[i],
        };
        for (double v : r) worst = std::max(worst, std::abs(v));
    }
    return worst;
}

// ============================================================================
// Transformed Laplacians
// ============================================================================

std::vector<cplx> transformed_laplacian(const StreakGrid& g, const JacobianSet& J,
                                        const std::vector<cplx>& f) {
    return laplacian_t(g, jac_phys(g, J), f);
}

std::vector<cplx> tilde_laplacian(const StreakGrid& g, const JacobianSet& J,
                                  const std::vector<cplx>& C1,
                                  const std::vector<cplx>& C2,
                                  const std::vector<cplx>& f) {
    const JacPhys jp = jac_phys(g, J);
    const auto ltC1p = to_phys2(g, laplacian_t(g, jp, C1));
    const auto ltC2p = to_phys2(g, laplacian_t(g, jp, C2));
    return tilde_from_parts(g, jp, ltC1p, ltC2p, f);
}

// ============================================================================
// Evolution
// ============================================================================

namespace {

struct CoordRhs {
    std::vector<cplx> dC1, dC2, dg;
};

CoordRhs coord_rhs(const StreakGrid& g, const std::vector<cplx>& C1,
                   const std::vector<cplx>& C2, const std::vector<cplx>& gf,
                   double t, double nu, const U0Fields& u0,
                   const std::vector<cplx>* forcing0) {
    JacobianSet J;
    try {
        J = jacobian_from_C(g, C1, C2);
    } catch (const std::runtime_error& err) {
        throw std::runtime_error(std::string(err.what()) + " at t = " +
                                 std::to_string(t));
    }
    const JacPhys jp = jac_phys(g, J);
    const auto ltC1p = to_phys2(g, laplacian_t(g, jp, C1));
    const auto ltC2p = to_phys2(g, laplacian_t(g, jp, C2));

    const auto gp = to_phys2(g, gf);
    const auto u2p = to_phys2(g, u0.u2), u3p = to_phys2(g, u0.u3);

    // -g dY f as a dealiased physical product.
    auto transport = [&](const std::vector<cplx>& f) {
        const auto fyp = to_phys2(g, deriv_y(g, f));
        std::vector<cplx> prod(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) prod[i] = -gp[i] * fyp[i];
        auto out = to_spec2(g, prod);
        dealias2(g, out);
        return out;
    };

    CoordRhs r;
    r.dC1 = transport(C1);
    r.dC2 = transport(C2);
    r.dg = transport(gf);

    const auto visC1 = tilde_from_parts(g, jp, ltC1p, ltC2p, C1);
    const auto visC2 = tilde_from_parts(g, jp, ltC1p, ltC2p, C2);
    const auto visg = tilde_from_parts(g, jp, ltC1p, ltC2p, gf);

    for (std::size_t i = 0; i < g.size(); ++i) {
        r.dC1[i] += gf[i] - u0.u2[i] + nu * visC1[i];
        r.dC2[i] += -u0.u3[i] + nu * visC2[i];
        r.dg[i] += -2.0 / t * gf[i] + nu * visg[i];
        if (forcing0) r.dg[i] -= (*forcing0)[i] / t;
    }
    return r;
}

} // namespace

CoordState evolve_coord(const CoordState& s, const U0Feed& feed, double dt,
                        const std::vector<cplx>* forcing0) {
    if (s.t < 1.0)
        throw std::invalid_argument("evolve_coord: needs t >= 1 (the g equation carries 1/t factors)");
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_coord: dt must be positive");

    const StreakGrid& g = s.grid;
    const double tm = s.t + 0.5 * dt, te = s.t + dt;
    const U0Fields u0a = feed(s.t), u0m = feed(tm), u0e = feed(te);

    auto blend = [&](const std::vector<cplx>& base, const std::vector<cplx>& k,
                     double h) {
        std::vector<cplx> out(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + h * k[i];
        return out;
    };

    const CoordRhs k1 = coord_rhs(g, s.C1, s.C2, s.g, s.t, s.nu, u0a, forcing0);
    const CoordRhs k2 =
        coord_rhs(g, blend(s.C1, k1.dC1, 0.5 * dt), blend(s.C2, k1.dC2, 0.5 * dt),
                  blend(s.g, k1.dg, 0.5 * dt), tm, s.nu, u0m, forcing0);
    const CoordRhs k3 =
        coord_rhs(g, blend(s.C1, k2.dC1, 0.5 * dt), blend(s.C2, k2.dC2, 0.5 * dt),
                  blend(s.g, k2.dg, 0.5 * dt), tm, s.nu, u0m, forcing0);
    const CoordRhs k4 = coord_rhs(g, blend(s.C1, k3.dC1, dt), blend(s.C2, k3.dC2, dt),
                                  blend(s.g, k3.dg, dt), te, s.nu, u0e, forcing0);

    CoordState out = s;
    out.t = te;
    for (std::size_t i = 0; i < g.size(); ++i) {
        out.C1[i] = s.C1[i] + dt / 6.0 * (k1.dC1[i] + 2.0 * k2.dC1[i] +
                                          2.0 * k3.dC1[i] + k4.dC1[i]);
        out.C2[i] = s.C2[i] + dt / 6.0 * (k1.dC2[i] + 2.0 * k2.dC2[i] +
                                          2.0 * k3.dC2[i] + k4.dC2[i]);
        out.g[i] = s.g[i] + dt / 6.0 * (k1.dg[i] + 2.0 * k2.dg[i] +
                                        2.0 * k3.dg[i] + k4.dg[i]);
    }
    return out;
}

// ============================================================================
// Lab-frame reconstruction
// ============================================================================

LabShift reconstruct_lab(const CoordState& s) {
    const StreakGrid& g = s.grid;
    std::vector<cplx> psi_p(g.size()), phi_p(g.size());
    int worst_iter = 0;
    for (int iy = 0; iy < g.ny; ++iy) {
        const double y = g.ly * iy / g.ny;
        for (int iz = 0; iz < g.nz; ++iz) {
            const double z = g.lz * iz / g.nz;
            double a = 0.0, b = 0.0;
            int it = 0;
            for (; it < 50; ++it) {
                const double an = eval_at(g, s.C1, y + a, z + b).real();
                const double bn = eval_at(g, s.C2, y + a, z + b).real();
                const double move = std::max(std::abs(an - a), std::abs(bn - b));
                a = an;
                b = bn;
                if (move <= 1e-12) break;
            }
            if (it == 50)
                throw std::runtime_error(
                    "reconstruct_lab: fixed point failed to converge in 50 iterations");
            worst_iter = std::max(worst_iter, it + 1);
            psi_p[g.idx(iy, iz)] = cplx(a, 0.0);
            phi_p[g.idx(iy, iz)] = cplx(b, 0.0);
        }
    }
    LabShift out;
    out.psi = to_spec2(g, psi_p);
    out.phi = to_spec2(g, phi_p);
    out.iterations = worst_iter;
    return out;
}

double coord_hnorm(const StreakGrid& g, const std::vector<cplx>& f, double sigma) {
    double acc = 0.0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
            const double eta = g.eta(iy), l = g.kz(iz);
            acc += std::pow(1.0 + eta * eta + l * l, sigma) *
                   std::norm(f[g.idx(iy, iz)]);
        }
    return std::sqrt(2.0 * pi / g.ly * acc);
}

double psi_vs_u1(const CoordState& s, const std::vector<cplx>& u1_0, double sigma) {
    if (u1_0.size() != s.grid.size())
        throw std::invalid_argument("psi_vs_u1: field size does not match grid");
    const LabShift lab = reconstruct_lab(s);
    std::vector<cplx> diff(s.grid.size());
    for (std::size_t i = 0; i < s.grid.size(); ++i) diff[i] = lab.psi[i] - u1_0[i];
    return coord_hnorm(s.grid, diff, sigma);
}

} // namespace c3d
