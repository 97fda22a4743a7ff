#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "c3d/coords.hpp"

#include <cmath>
#include <random>

using namespace c3d;

namespace {

// Plant a real mode amp * cos(my eta0 Y + mz kz0 Z + phase).
void plant(const StreakGrid& g, std::vector<cplx>& f, int my, int mz, double amp,
           double phase) {
    auto wrap = [&](int m, int n) { return m >= 0 ? m : m + n; };
    const cplx half = 0.5 * amp * std::polar(1.0, phase);
    f[g.idx(wrap(my, g.ny), wrap(mz, g.nz))] += half;
    f[g.idx(wrap(-my, g.ny), wrap(-mz, g.nz))] += std::conj(half);
}

std::vector<cplx> phys(const StreakGrid& g, const std::vector<cplx>& spec) {
    std::vector<cplx> out(g.size());
    dft_any({g.ny, g.nz}, spec.data(), out.data(), /*forward=*/false);
    return out;
}

std::vector<cplx> spectral_dy(const StreakGrid& g, const std::vector<cplx>& f) {
    std::vector<cplx> out(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz)
            out[g.idx(iy, iz)] = cplx(0.0, g.eta(iy)) * f[g.idx(iy, iz)];
    return out;
}

std::vector<cplx> spectral_dz(const StreakGrid& g, const std::vector<cplx>& f) {
    std::vector<cplx> out(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz)
            out[g.idx(iy, iz)] = cplx(0.0, g.kz(iz)) * f[g.idx(iy, iz)];
    return out;
}

cplx eval_spec(const StreakGrid& g, const std::vector<cplx>& spec, double y,
               double z) {
    cplx sum(0.0, 0.0);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz)
            sum += spec[g.idx(iy, iz)] *
                   std::polar(1.0, g.eta(iy) * y + g.kz(iz) * z);
    return sum;
}

double max_abs(const std::vector<cplx>& a) {
    double m = 0.0;
    for (const auto& c : a) m = std::max(m, std::abs(c));
    return m;
}

CoordState small_random_state(const StreakGrid& g, double scale, unsigned seed) {
    CoordState s(g, 0.0, 2.0);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> amp(-scale, scale), ph(0.0, 2.0 * pi);
    for (int my = -2; my <= 2; ++my)
        for (int mz = -2; mz <= 2; ++mz) {
            if (my == 0 && mz == 0) continue;
            plant(g, s.C1, my, mz, amp(rng), ph(rng));
            plant(g, s.C2, my, mz, amp(rng), ph(rng));
        }
    return s;
}

U0Feed zero_feed(const StreakGrid& g) {
    return [&g](double) {
        U0Fields u;
        u.u1.assign(g.size(), cplx(0.0, 0.0));
        u.u2.assign(g.size(), cplx(0.0, 0.0));
        u.u3.assign(g.size(), cplx(0.0, 0.0));
        return u;
    };
}

} // namespace

// ============================================================================
// Jacobian factors
// ============================================================================

TEST_CASE("zero transform has zero factors and unit determinant") {
    StreakGrid g(16, 16);
    std::vector<cplx> zero(g.size(), cplx(0.0, 0.0));
    const auto J = jacobian_from_C(g, zero, zero);
    CHECK(max_abs(J.psi_y) == 0.0);
    CHECK(max_abs(J.psi_z) == 0.0);
    CHECK(max_abs(J.phi_y) == 0.0);
    CHECK(max_abs(J.phi_z) == 0.0);
    CHECK(max_abs(J.G_yy) <= 1e-15);
    CHECK(max_abs(J.G_yz) <= 1e-15);
    CHECK(max_abs(J.G_zz) <= 1e-15);
    CHECK(J.min_det == doctest::Approx(1.0));
    CHECK(jacobian_residual(g, zero, zero, J) == 0.0);
}

TEST_CASE("one-dimensional shear reduces to the scalar closed form") {
    StreakGrid g(32, 16);
    std::vector<cplx> C1(g.size(), cplx(0.0, 0.0)), C2(g.size(), cplx(0.0, 0.0));
    plant(g, C1, 1, 0, 0.2, 0.7);
    plant(g, C1, 3, 0, 0.05, -0.4);
    const auto J = jacobian_from_C(g, C1, C2);
    CHECK(max_abs(J.psi_z) <= 1e-14);
    CHECK(max_abs(J.phi_y) <= 1e-14);
    CHECK(max_abs(J.phi_z) <= 1e-14);
    const auto dy = phys(g, spectral_dy(g, C1));
    const auto py = phys(g, J.psi_y);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double expect = dy[i].real() / (1.0 - dy[i].real());
        CHECK(std::abs(py[i].real() - expect) <= 1e-13);
    }
}

TEST_CASE("pointwise solve matches the printed series expressions") {
    StreakGrid g(32, 32);
    auto s = small_random_state(g, 0.02, 4201);
    const auto J = jacobian_from_C(g, s.C1, s.C2);
    const auto c1y = phys(g, spectral_dy(g, s.C1)), c1z = phys(g, spectral_dz(g, s.C1));
    const auto c2y = phys(g, spectral_dy(g, s.C2)), c2z = phys(g, spectral_dz(g, s.C2));
    const auto py = phys(g, J.psi_y), pz = phys(g, J.psi_z);
    const auto fy = phys(g, J.phi_y), fz = phys(g, J.phi_z);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = c1y[i].real(), b = c1z[i].real();
        const double c = c2y[i].real(), e = c2z[i].real();
        const double S = e + c * b / (1.0 - a);
        const double phi_z = S / (1.0 - S);
        const double phi_y = c / ((1.0 - a) * (1.0 - S));
        const double psi_z = (1.0 + phi_z) * b / (1.0 - a);
        const double psi_y = (a + b * phi_y) / (1.0 - a);
        CHECK(std::abs(fz[i].real() - phi_z) <= 1e-12);
        CHECK(std::abs(fy[i].real() - phi_y) <= 1e-12);
        CHECK(std::abs(pz[i].real() - psi_z) <= 1e-12);
        CHECK(std::abs(py[i].real() - psi_y) <= 1e-12);
    }
}

TEST_CASE("chain-rule identities close after substitution") {
    StreakGrid g(32, 32);
    for (unsigned seed : {11u, 12u, 13u}) {
        auto s = small_random_state(g, 0.012, seed);  // ~|grad C| <= 0.1
        const auto J = jacobian_from_C(g, s.C1, s.C2);
        CAPTURE(seed);
        CHECK(J.max_grad <= 0.12);
        CHECK(jacobian_residual(g, s.C1, s.C2, J) <= 1e-10);
        // G identities against the factor fields themselves.
        const auto py = phys(g, J.psi_y), pz = phys(g, J.psi_z);
        const auto fy = phys(g, J.phi_y), fz = phys(g, J.phi_z);
        const auto gyy = phys(g, J.G_yy), gyz = phys(g, J.G_yz), gzz = phys(g, J.G_zz);
        for (std::size_t i = 0; i < g.size(); i += 7) {
            const double p = py[i].real(), q = pz[i].real();
            const double r = fy[i].real(), w = fz[i].real();
            CHECK(std::abs(gyy[i].real() - ((1 + p) * (1 + p) + q * q - 1)) <= 1e-12);
            CHECK(std::abs(gyz[i].real() - (2 * r * (1 + p) + 2 * q * (1 + w))) <= 1e-12);
            CHECK(std::abs(gzz[i].real() - ((1 + w) * (1 + w) + r * r - 1)) <= 1e-12);
        }
    }
}

TEST_CASE("transforms outside the invertibility regime are rejected") {
    StreakGrid g(16, 16);
    std::vector<cplx> C1(g.size(), cplx(0.0, 0.0)), C2(g.size(), cplx(0.0, 0.0));
    plant(g, C1, 1, 0, 1.2, 0.0);  // |dY C1| up to 0.6
    CHECK_THROWS_AS(jacobian_from_C(g, C1, C2), std::runtime_error);
}

// ============================================================================
// Transformed Laplacian
// ============================================================================

TEST_CASE("assembled laplacian agrees with the lab-frame composition") {
    StreakGrid g(32, 32);
    CoordState s(g, 0.0, 5.0);
    plant(g, s.C1, 1, 1, 0.02, 0.3);
    plant(g, s.C1, 2, -1, 0.01, 1.1);
    plant(g, s.C2, 1, 2, 0.015, -0.7);
    plant(g, s.C2, 0, 1, 0.01, 0.2);
    const auto J = jacobian_from_C(g, s.C1, s.C2);

    // Path one: Delta_t C1 assembled from the Jacobian factors in the moving
    // frame. Path two: reconstruct psi(y,z), take the flat Laplacian in lab
    // coordinates, and evaluate it at the exact preimage of each node
    // (y, z) = (Y - C1(Y,Z), Z - C2(Y,Z)).
    const auto lt = phys(g, transformed_laplacian(g, J, s.C1));
    const auto lab = reconstruct_lab(s);
    std::vector<cplx> dpsi(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
            const double eta = g.eta(iy), l = g.kz(iz);
            dpsi[g.idx(iy, iz)] = -(eta * eta + l * l) * lab.psi[g.idx(iy, iz)];
        }
    const auto C1p = phys(g, s.C1), C2p = phys(g, s.C2);
    double worst = 0.0;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
            const std::size_t i = g.idx(iy, iz);
            const double y = g.ly * iy / g.ny - C1p[i].real();
            const double z = g.lz * iz / g.nz - C2p[i].real();
            worst = std::max(worst,
                             std::abs(eval_spec(g, dpsi, y, z).real() - lt[i].real()));
        }
    CHECK(worst <= 1e-6);  // measured 9.0e-10 on this data
}

// ============================================================================
// Evolution
// ============================================================================

TEST_CASE("state is frozen without feeds") {
    StreakGrid g(16, 16);

    SUBCASE("zero state stays zero under viscosity") {
        CoordState s(g, 0.05, 1.0);
        for (int n = 0; n < 5; ++n) s = evolve_coord(s, zero_feed(g), 0.1);
        CHECK(max_abs(s.C1) == 0.0);
        CHECK(max_abs(s.C2) == 0.0);
        CHECK(max_abs(s.g) == 0.0);
        CHECK(s.t == doctest::Approx(1.5));
    }

    SUBCASE("inviscid nonzero C stays put when g = 0") {
        auto s = small_random_state(g, 0.01, 77);
        const auto c1 = s.C1, c2 = s.C2;
        for (int n = 0; n < 5; ++n) s = evolve_coord(s, zero_feed(g), 0.1);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(std::abs(s.C1[i] - c1[i]) <= 1e-15);
            CHECK(std::abs(s.C2[i] - c2[i]) <= 1e-15);
        }
    }
}

TEST_CASE("steady cross-stream feed integrates to a linear-in-time shift") {
    StreakGrid g(16, 16);
    const double eps = 1e-3;
    std::vector<cplx> u3(g.size(), cplx(0.0, 0.0));
    plant(g, u3, 0, 1, eps, -0.5 * pi);  // eps sin Z
    U0Feed feed = [&](double) {
        U0Fields u;
        u.u1.assign(g.size(), cplx(0.0, 0.0));
        u.u2.assign(g.size(), cplx(0.0, 0.0));
        u.u3 = u3;
        return u;
    };
    CoordState s(g, 0.0, 1.0);
    while (s.t < 9.0 - 1e-9) s = evolve_coord(s, feed, 0.05);
    // dt C2 = -U3_0 with everything else zero: C2(t) = -(t - 1) eps sin Z.
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(s.C2[i] - (-(s.t - 1.0)) * u3[i]) <= 1e-12);
        CHECK(std::abs(s.C1[i]) <= 1e-15);
        CHECK(std::abs(s.g[i]) <= 1e-15);
    }
}

TEST_CASE("inviscid zero-g evolution is a quadrature of the feed") {
    StreakGrid g(16, 16);
    std::vector<cplx> mode_a(g.size(), cplx(0.0, 0.0)), mode_b(g.size(), cplx(0.0, 0.0));
    plant(g, mode_a, 1, 1, 1.0, 0.2);
    plant(g, mode_b, 0, 2, 1.0, -0.9);
    auto feed_of = [&](double wa, double wb) {
        return U0Feed([&, wa, wb](double t) {
            U0Fields u;
            u.u1.assign(g.size(), cplx(0.0, 0.0));
            u.u2.resize(g.size());
            u.u3.assign(g.size(), cplx(0.0, 0.0));
            for (std::size_t i = 0; i < g.size(); ++i)
                u.u2[i] = (wa * std::sin(t) * mode_a[i] + wb * std::cos(t) * mode_b[i]) * 1e-3;
            return u;
        });
    };
    auto run = [&](const U0Feed& f) {
        CoordState s(g, 0.0, 1.0);
        for (int n = 0; n < 80; ++n) s = evolve_coord(s, f, 0.05);
        return s;
    };
    const auto sa = run(feed_of(1.0, 0.0));
    const auto sb = run(feed_of(0.0, 1.0));
    const auto sab = run(feed_of(1.0, 1.0));

    // C1(t) = -int_1^t U2_0: closed form for the sin(t) feed.
    const double T = sa.t;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx expect = (std::cos(T) - std::cos(1.0)) * 1e-3 * mode_a[i];
        CHECK(std::abs(sa.C1[i] - expect) <= 1e-9);
        // superposition
        CHECK(std::abs(sab.C1[i] - sa.C1[i] - sb.C1[i]) <= 1e-14);
        CHECK(std::abs(sab.C2[i]) <= 1e-15);
    }
}

TEST_CASE("evolution rejects bad inputs and invertibility loss") {
    StreakGrid g(16, 16);
    CoordState s(g, 0.0, 1.0);

    SUBCASE("time below one") {
        s.t = 0.5;
        CHECK_THROWS_AS(evolve_coord(s, zero_feed(g), 0.1), std::invalid_argument);
    }

    SUBCASE("nonpositive step") {
        CHECK_THROWS_AS(evolve_coord(s, zero_feed(g), 0.0), std::invalid_argument);
    }

    SUBCASE("invertibility loss mid-step carries a time stamp") {
        plant(g, s.C1, 1, 0, 0.9, 0.0);  // |dY C1| up to 0.45: valid but close
        std::vector<cplx> push(g.size(), cplx(0.0, 0.0));
        plant(g, push, 1, 0, 8.0, 0.0);  // strong U2_0 drives C1 further
        U0Feed feed = [&](double) {
            U0Fields u;
            u.u1.assign(g.size(), cplx(0.0, 0.0));
            u.u2 = push;
            u.u3.assign(g.size(), cplx(0.0, 0.0));
            return u;
        };
        bool threw = false;
        try {
            for (int n = 0; n < 20; ++n) s = evolve_coord(s, feed, 0.1);
        } catch (const std::runtime_error& e) {
            threw = true;
            CHECK(std::string(e.what()).find("at t = ") != std::string::npos);
        }
        CHECK(threw);
    }
}

// ============================================================================
// Lab-frame reconstruction
// ============================================================================

TEST_CASE("fixed point converges fast and satisfies the map identity") {
    StreakGrid g(32, 32);
    auto s = small_random_state(g, 0.012, 91);
    const auto lab = reconstruct_lab(s);
    CHECK(lab.iterations <= 20);

    // psi evaluated at the preimage of a node equals C1 at the node.
    const auto C1p = phys(g, s.C1), C2p = phys(g, s.C2);
    for (int iy = 0; iy < g.ny; iy += 3)
        for (int iz = 0; iz < g.nz; iz += 3) {
            const std::size_t i = g.idx(iy, iz);
            const double y = g.ly * iy / g.ny - C1p[i].real();
            const double z = g.lz * iz / g.nz - C2p[i].real();
            CHECK(std::abs(eval_spec(g, lab.psi, y, z).real() - C1p[i].real()) <=
                  1e-7);
        }
}

TEST_CASE("y-independent shift reproduces the streamwise field exactly") {
    StreakGrid g(16, 16);
    CoordState s(g, 0.0, 1.0);
    plant(g, s.C1, 0, 1, 0.05, 0.3);
    plant(g, s.C1, 0, 2, 0.02, -1.0);
    // With C2 = 0 and C1 independent of Y the map identity gives psi(y,z) =
    // C1(z) with no correction at all.
    CHECK(psi_vs_u1(s, s.C1) <= 1e-12);
    CHECK(psi_vs_u1(s, s.C1, 2.0) <= 1e-12);
}

// ============================================================================
// Streak-fed run
// ============================================================================

TEST_CASE("streak-fed run realizes the inverse-square decay of g") {
    // Shear-layer streak (u2 = eps sin z) plus a small 2D mode feeds the
    // coordinate system over t in [1, 50]. Measured on this data:
    //   max ||g|| <t>^2 / eps       = 0.99
    //   max ||psi - u1|| <t> / eps  = 3.68
    //   max chain-rule residual     = 4.4e-17
    //   min pointwise determinant   = 0.9997
    const double eps = 1e-3, nu = 1e-4, dt = 0.04;
    StreakGrid g(32, 32);

    StreakState st(g, nu);
    plant(g, st.omega, 0, 1, -eps, 0.0);
    plant(g, st.omega, 1, 1, 0.3 * eps, 0.4);
    while (st.t < 1.0 - 1e-9) st = streak_step(st, dt);

    CoordState cs(g, nu, 1.0);
    cs.g = st.u1;  // g(1) = (U1_0(1) - C1(1)) / 1 with C1(1) = 0

    double worst_g = 0.0, worst_psi = 0.0, worst_resid = 0.0, min_det = 1e300;
    const int steps = static_cast<int>((50.0 - 1.0) / dt + 0.5);
    for (int n = 0; n < steps; ++n) {
        StreakState sh = streak_step(st, dt / 2);
        StreakState sf = streak_step(sh, dt / 2);
        auto feed = [&](double t) -> U0Fields {
            const StreakState* p = nullptr;
            if (std::abs(t - st.t) < 1e-9) p = &st;
            else if (std::abs(t - sh.t) < 1e-9) p = &sh;
            else if (std::abs(t - sf.t) < 1e-9) p = &sf;
            REQUIRE(p != nullptr);
            U0Fields u;
            u.u1 = p->u1;
            streak_velocity(g, p->omega, u.u2, u.u3);
            return u;
        };
        cs = evolve_coord(cs, feed, dt);
        st = sf;
        const double jt2 = 1.0 + cs.t * cs.t;
        worst_g = std::max(worst_g, coord_hnorm(g, cs.g, 0.0) * jt2 / eps);
        if (n % 50 == 0 || n == steps - 1) {
            const auto J = jacobian_from_C(g, cs.C1, cs.C2);
            worst_resid =
                std::max(worst_resid, jacobian_residual(g, cs.C1, cs.C2, J));
            min_det = std::min(min_det, J.min_det);
            worst_psi = std::max(worst_psi,
                                 psi_vs_u1(cs, st.u1) * std::sqrt(jt2) / eps);
        }
    }
    CHECK(worst_g <= 5.0);
    CHECK(worst_psi <= 5.0);
    CHECK(worst_resid <= 1e-10);
    CHECK(min_det >= 0.99);
    CHECK(cs.t == doctest::Approx(50.0));
}
