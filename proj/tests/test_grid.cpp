#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "c3d/grid.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace c3d;

namespace {

SpectralField random_band_limited(const GridSpec& s, std::uint64_t seed, double amp = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralField f(s);
    for (auto& c : f.a) c = amp * cplx(gauss(rng), gauss(rng));
    apply_dealias(f);
    hermitianize(f);
    return f;
}

// Direct evaluation of the physical function a shear-frame field represents at
// lab point (x,y,z) and time t: sum of a * exp(i(k x + (eta - k(t-t_remap)) y + l z)).
cplx eval_lab(const SpectralField& f, double x, double y, double z, double t) {
    const GridSpec& s = f.spec;
    const double tau = t - f.t_remap;
    cplx sum = 0.0;
    for (int ix = 0; ix < s.nx; ++ix)
        for (int iy = 0; iy < s.ny; ++iy)
            for (int iz = 0; iz < s.nz; ++iz) {
                const double k = s.kx(ix), l = s.kz(iz);
                const double e = s.eta(iy) - tau * k;
                sum += f.at(ix, iy, iz) *
                       std::exp(cplx(0.0, k * x + e * y + l * z));
            }
    return sum;
}

} // namespace

TEST_CASE("mode bookkeeping and transforms round-trip") {
    GridSpec s(8, 12, 6, 2.0 * pi, 4.0 * pi, 2.0 * pi);
    CHECK(GridSpec::mode_of(0, 8) == 0);
    CHECK(GridSpec::mode_of(3, 8) == 3);
    CHECK(GridSpec::mode_of(4, 8) == -4);
    CHECK(GridSpec::mode_of(7, 8) == -1);
    CHECK(s.eta(1) == doctest::Approx(0.5));  // Ly = 4*pi halves the eta spacing

    // single mode lands where it should and reproduces the analytic wave
    SpectralField f(s);
    f.at(1, GridSpec::index_of(2, s.ny), s.nz - 1) = cplx(0.3, -0.2);
    auto phys = to_physical(f);
    const double x = s.x(3), y = s.y(5), z = s.z(4);
    const cplx expect = cplx(0.3, -0.2) * std::exp(cplx(0.0, s.kx(1) * x + s.eta(GridSpec::index_of(2, s.ny)) * y + s.kz(s.nz - 1) * z));
    CHECK(std::abs(phys[s.idx(3, 5, 4)] - expect) < 1e-12);

    auto back = to_spectral(phys, s);
    double worst = 0.0;
    for (std::size_t i = 0; i < back.a.size(); ++i) worst = std::max(worst, std::abs(back.a[i] - f.a[i]));
    CHECK(worst < 1e-13);
}

TEST_CASE("shear wavenumber and tilted Laplacian symbol") {
    auto kt = shear_wavenumber(1.0, 2.0, 0.0, 3.0);
    CHECK(kt[0] == 1.0);
    CHECK(kt[1] == -1.0);
    CHECK(kt[2] == 0.0);
    CHECK(laplacian_l_symbol(1.0, 2.0, 0.0, 2.0) == doctest::Approx(-1.0));
    // symbol equals -(|shear_wavenumber|^2) by construction
    const double k = 2.0, eta = -1.5, l = 3.0, tau = 4.25;
    auto w = shear_wavenumber(k, eta, l, tau);
    CHECK(laplacian_l_symbol(k, eta, l, tau) ==
          doctest::Approx(-(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])).epsilon(1e-14));
}

TEST_CASE("dealias mask cutoff") {
    GridSpec s(12, 12, 12);
    SpectralField f(s);
    for (auto& c : f.a) c = 1.0;
    apply_dealias(f);
    // 2/3 rule on N=12: keep |m| <= 4, zero |m| > 4
    CHECK(f.at(GridSpec::index_of(4, 12), 0, 0) == cplx(1.0, 0.0));
    CHECK(f.at(GridSpec::index_of(5, 12), 0, 0) == cplx(0.0, 0.0));
    CHECK(f.at(0, GridSpec::index_of(-5, 12), 0) == cplx(0.0, 0.0));
    CHECK(f.at(0, 0, GridSpec::index_of(-4, 12)) == cplx(1.0, 0.0));
}

TEST_CASE("pseudo-spectral product equals brute-force convolution (oracle)") {
    GridSpec s(12, 8, 6);
    auto f = random_band_limited(s, 11);
    auto g = random_band_limited(s, 22);
    auto prod = multiply_dealiased(f, g);

    // The collocation product computes the circular (mod-N) convolution
    // exactly; inside the band it also matches the linear convolution except
    // possibly at the extreme 2/3 corner |m| = N/3 where m1 = m2 = N/3 wraps.
    auto wrap = [](int m, int n) {
        int r = m % n;
        if (r < -n / 2) r += n;
        if (r >= (n + 1) / 2) r -= n;
        return r;
    };
    double worst_circ = 0.0, worst_lin = 0.0;
    for (int ox = 0; ox < s.nx; ++ox)
        for (int oy = 0; oy < s.ny; ++oy)
            for (int oz = 0; oz < s.nz; ++oz) {
                if (!s.in_dealias_band(ox, oy, oz)) {
                    worst_circ = std::max(worst_circ, std::abs(prod.at(ox, oy, oz)));
                    continue;
                }
                const int mx = GridSpec::mode_of(ox, s.nx);
                const int my = GridSpec::mode_of(oy, s.ny);
                const int mz = GridSpec::mode_of(oz, s.nz);
                cplx circ = 0.0, lin = 0.0;
                for (int ax = -s.nx / 2; ax < s.nx / 2; ++ax)
                    for (int ay = -s.ny / 2; ay < s.ny / 2; ++ay)
                        for (int az = -s.nz / 2; az < s.nz / 2; ++az) {
                            const cplx av = f.at(GridSpec::index_of(ax, s.nx),
                                                 GridSpec::index_of(ay, s.ny),
                                                 GridSpec::index_of(az, s.nz));
                            if (av == cplx(0.0, 0.0)) continue;
                            const int bx = mx - ax, by = my - ay, bz = mz - az;
                            const int cx = wrap(bx, s.nx), cy = wrap(by, s.ny),
                                      cz = wrap(bz, s.nz);
                            const cplx bv = g.at(GridSpec::index_of(cx, s.nx),
                                                 GridSpec::index_of(cy, s.ny),
                                                 GridSpec::index_of(cz, s.nz));
                            circ += av * bv;
                            if (bx == cx && by == cy && bz == cz) lin += av * bv;
                        }
                worst_circ = std::max(worst_circ, std::abs(prod.at(ox, oy, oz) - circ));
                // strictly inside the band no wrap can land: linear = circular
                if (std::abs(mx) < s.nx / 3.0 && std::abs(my) < s.ny / 3.0 &&
                    std::abs(mz) < s.nz / 3.0)
                    worst_lin = std::max(worst_lin, std::abs(prod.at(ox, oy, oz) - lin));
            }
    CHECK(worst_circ < 1e-12);
    CHECK(worst_lin < 1e-12);
}

TEST_CASE("gevrey norm: single mode, weights, overflow") {
    GridSpec s(8, 8, 8);
    SpectralField f(s);
    f.at(1, GridSpec::index_of(2, s.ny), 0) = 2.0;  // k=1, eta=1 (Ly=4*pi), l=0
    const double lambda = 0.5, sigma = 2.0, gs = 0.5;
    const double k = 1.0, eta = 1.0;
    const double expect = 2.0 * std::exp(lambda * std::pow(2.0, gs)) *
                          std::pow(1.0 + k * k + eta * eta, sigma / 2.0) *
                          std::sqrt(2.0 * pi / s.ly);
    CHECK(gevrey_norm(f, lambda, sigma, gs) == doctest::Approx(expect).epsilon(1e-12));

    // lambda = sigma = 0 reduces to the plain L2 norm
    CHECK(gevrey_norm(f, 0.0, 0.0, 0.5) == doctest::Approx(l2_norm(f)).epsilon(1e-13));

    CHECK_THROWS_AS(gevrey_norm(f, 400.0, 0.0, 1.0), std::range_error);
    CHECK_THROWS_AS(gevrey_norm(f, -1.0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("solenoidal projection against the moving wavenumber") {
    GridSpec s(8, 16, 8);
    VectorField v(s, Frame::shear, 1.0);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int c = 0; c < 3; ++c) {
        for (auto& x : v[c].a) x = cplx(gauss(rng), gauss(rng));
        apply_dealias(v[c]);
        hermitianize(v[c]);
    }
    const double t = 3.5;  // tau = 2.5
    auto p = project_divergence_free(v, t);
    CHECK(divergence_max(p, t) < 1e-12);
    // idempotent
    auto pp = project_divergence_free(p, t);
    double worst = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < p[c].a.size(); ++i)
            worst = std::max(worst, std::abs(pp[c].a[i] - p[c].a[i]));
    CHECK(worst < 1e-13);
    // mean mode untouched
    v[0].at(0, 0, 0) = cplx(4.0, 0.0);
    auto q = project_divergence_free(v, t);
    CHECK(q[0].at(0, 0, 0) == cplx(4.0, 0.0));
}

TEST_CASE("remap re-indexing, energy accounting, physical equivalence") {
    SUBCASE("frozen single-mode example, Lx = Ly = 2*pi") {
        GridSpec s(8, 8, 4, 2.0 * pi, 2.0 * pi, 2.0 * pi);
        VectorField v(s, Frame::shear, 0.0);
        v[0].at(1, GridSpec::index_of(2, s.ny), 0) = 1.0;
        auto r = remap(v, 1.0);  // dt = 1 = Lx/Ly
        CHECK(r.dropped_energy == 0.0);
        CHECK(r.field.t_remap() == 1.0);
        CHECK(std::abs(r.field[0].at(1, GridSpec::index_of(1, s.ny), 0) - cplx(1.0, 0.0)) < 1e-15);
        CHECK(std::abs(r.field[0].at(1, GridSpec::index_of(2, s.ny), 0)) == 0.0);
    }

    SUBCASE("physical field unchanged by remap (default box)") {
        GridSpec s(6, 12, 4);  // Lx/Ly = 1/2, one cadence shifts eta by one cell per x-mode
        VectorField v(s, Frame::shear, 0.25);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int c = 0; c < 3; ++c) {
            for (auto& x : v[c].a) x = 0.1 * cplx(gauss(rng), gauss(rng));
            apply_dealias(v[c]);
            // keep the eta band narrow enough that the shift stays on-grid
            for (int ix = 0; ix < s.nx; ++ix)
                for (int iy = 0; iy < s.ny; ++iy)
                    for (int iz = 0; iz < s.nz; ++iz)
                        if (std::abs(GridSpec::mode_of(iy, s.ny)) > 2) v[c].at(ix, iy, iz) = 0.0;
        }
        const double t = 0.25 + 0.5;
        auto r = remap(v, t);
        CHECK(r.dropped_energy == 0.0);
        for (double pt : {0.13, 1.9, 3.7}) {
            const cplx before = eval_lab(v[0], pt, 2.0 * pt, 0.5 + pt, t);
            const cplx after = eval_lab(r.field[0], pt, 2.0 * pt, 0.5 + pt, t);
            CHECK(std::abs(before - after) < 1e-10);
        }
    }

    SUBCASE("off-grid modes are dropped with their energy reported") {
        GridSpec s(8, 8, 4, 2.0 * pi, 2.0 * pi, 2.0 * pi);
        VectorField v(s, Frame::shear, 0.0);
        v[1].at(3, GridSpec::index_of(-2, s.ny), 0) = cplx(0.0, 2.0);  // shifts to -5: off grid
        auto r = remap(v, 1.0);
        CHECK(l2_norm(r.field[1]) == 0.0);
        CHECK(r.dropped_energy == doctest::Approx(4.0 * 2.0 * pi / s.ly));
    }

    SUBCASE("non-integral remap times are rejected") {
        GridSpec s(8, 8, 4);  // Lx/Ly = 1/2
        VectorField v(s);
        CHECK_THROWS_AS(remap(v, 0.3), std::invalid_argument);
    }
}

TEST_CASE("snapshot write/read round-trip and corruption errors") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "c3d_snap_test";
    fs::create_directories(dir);
    const std::string path = (dir / "f.c3df").string();

    GridSpec s(8, 12, 6);
    auto f = random_band_limited(s, 99, 0.7);
    f.frame = Frame::shear;
    f.t_remap = 1.5;
    write_snapshot(path, f, 2.25);

    auto snap = read_snapshot(path, GridSpec());
    CHECK(snap.t == 2.25);
    CHECK(snap.field.t_remap == 1.5);
    CHECK(snap.field.frame == Frame::shear);
    CHECK(snap.field.spec.nx == 8);
    CHECK(snap.field.spec.ny == 12);
    CHECK(snap.field.spec.nz == 6);
    double worst = 0.0;
    for (std::size_t i = 0; i < f.a.size(); ++i)
        worst = std::max(worst, std::abs(snap.field.a[i] - f.a[i]));
    CHECK(worst == 0.0);  // bit-exact

    SUBCASE("bad magic") {
        std::fstream fsw(path, std::ios::binary | std::ios::in | std::ios::out);
        fsw.seekp(0);
        fsw.write("XXXX", 4);
        fsw.close();
        CHECK_THROWS_WITH_AS(read_snapshot(path), doctest::Contains("offset 0"),
                             std::runtime_error);
    }
    SUBCASE("truncated payload") {
        fs::resize_file(path, 37 + 16 * 10);
        CHECK_THROWS_WITH_AS(read_snapshot(path), doctest::Contains("size mismatch"),
                             std::runtime_error);
    }
    fs::remove_all(dir);
}

TEST_CASE("hermitian symmetry helpers") {
    GridSpec s(6, 6, 6);
    SpectralField f(s);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& c : f.a) c = cplx(gauss(rng), gauss(rng));
    CHECK(hermitian_defect(f) > 0.1);
    hermitianize(f);
    CHECK(hermitian_defect(f) < 1e-14);
    auto phys = to_physical(f);
    double max_imag = 0.0;
    for (auto& p : phys) max_imag = std::max(max_imag, std::abs(p.imag()));
    CHECK(max_imag < 1e-12);
}
