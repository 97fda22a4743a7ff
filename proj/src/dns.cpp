#include "c3d/dns.hpp"

#include "c3d/linear.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace c3d {

namespace {

bool all_finite(const VectorField& v) {
    for (int c = 0; c < 3; ++c)
        for (const cplx& a : v[c].a)
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    return true;
}

// exp(-nu * integral of |k~|^2) over [a, b] (absolute times), per mode.
std::vector<double> decay_factors(const GridSpec& g, double nu, double t_remap,
                                  double a, double b) {
    std::vector<double> e(g.size(), 1.0);
    if (nu == 0.0 || a == b) return e;
    for (int ix = 0; ix < g.nx; ++ix) {
        const double k = g.kx(ix);
        for (int iy = 0; iy < g.ny; ++iy) {
            const double eta = g.eta(iy);
            for (int iz = 0; iz < g.nz; ++iz) {
                const double l = g.kz(iz);
                e[g.idx(ix, iy, iz)] = std::exp(
                    -nu * visc_integral(k, eta, l, a - t_remap, b - t_remap));
            }
        }
    }
    return e;
}

// out = decay * (base + w * add)
VectorField stage_state(const VectorField& base, const VectorField& add, double w,
                        const std::vector<double>& decay) {
    VectorField out = base;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < decay.size(); ++i)
            out[c].a[i] = decay[i] * (base[c].a[i] + w * add[c].a[i]);
    return out;
}

} // namespace

BlowupError::BlowupError(double t)
    : std::runtime_error([t] {
          std::ostringstream os;
          os << "field stopped being finite at t = " << t;
          return os.str();
      }()),
      t_(t) {}

// ============================================================================
// Right-hand side
// ============================================================================

VectorField dns_rhs(const DnsState& s) {
    const GridSpec& g = s.u.spec();
    if (g.size() == 0) throw std::invalid_argument("dns_rhs: empty state");
    if (!all_finite(s.u)) throw BlowupError(s.t);
    const double t_remap = s.u.t_remap();
    const double tau = s.t - t_remap;

    // Physical velocities, reused across all nine gradient products.
    std::array<std::vector<cplx>, 3> up;
    for (int c = 0; c < 3; ++c) up[c] = to_physical(s.u[c]);

    VectorField rhs(g, Frame::shear, t_remap);
    std::vector<cplx> acc(g.size());
    SpectralField grad(g, Frame::shear, t_remap);
    for (int c = 0; c < 3; ++c) {
        std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
        for (int j = 0; j < 3; ++j) {
            for (int ix = 0; ix < g.nx; ++ix)
                for (int iy = 0; iy < g.ny; ++iy) {
                    const auto kt =
                        shear_wavenumber(g.kx(ix), g.eta(iy), 0.0, tau);
                    for (int iz = 0; iz < g.nz; ++iz) {
                        const std::size_t i = g.idx(ix, iy, iz);
                        const double kj = j == 2 ? g.kz(iz) : kt[j];
                        grad.a[i] = cplx(0.0, kj) * s.u[c].a[i];
                    }
                }
            const auto gp = to_physical(grad);
            for (std::size_t i = 0; i < g.size(); ++i) acc[i] += up[j][i] * gp[i];
        }
        SpectralField adv = to_spectral(acc, g, Frame::shear, t_remap);
        apply_dealias(adv);
        for (std::size_t i = 0; i < g.size(); ++i) rhs[c].a[i] = -adv.a[i];
    }

    // Lift-up source.
    for (std::size_t i = 0; i < g.size(); ++i) rhs[0].a[i] -= s.u[1].a[i];

    rhs = project_divergence_free(rhs, s.t);

    // Wavenumber-rotation compensation: + k~ (k u^2) / |k~|^2.
    for (int ix = 0; ix < g.nx; ++ix) {
        const double k = g.kx(ix);
        if (k == 0.0) continue;
        for (int iy = 0; iy < g.ny; ++iy) {
            const auto kt = shear_wavenumber(k, g.eta(iy), 0.0, tau);
            for (int iz = 0; iz < g.nz; ++iz) {
                const double l = g.kz(iz);
                const double m2 = kt[0] * kt[0] + kt[1] * kt[1] + l * l;
                const std::size_t i = g.idx(ix, iy, iz);
                const cplx w = k * s.u[1].a[i] / m2;
                rhs[0].a[i] += kt[0] * w;
                rhs[1].a[i] += kt[1] * w;
                rhs[2].a[i] += l * w;
            }
        }
    }
    return rhs;
}

// ============================================================================
// Stepping
// ============================================================================

double dns_cfl_bound(const DnsState& s) {
    const GridSpec& g = s.u.spec();
    double vmax = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto p = to_physical(s.u[c]);
        for (const cplx& v : p) vmax = std::max(vmax, std::abs(v));
    }
    if (vmax == 0.0) return std::numeric_limits<double>::infinity();
    const double h = std::min({g.lx / g.nx, g.ly / g.ny, g.lz / g.nz});
    return 0.5 * h / vmax;
}

DnsState dns_step(const DnsState& s, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("dns_step: dt must be positive");
    const GridSpec& g = s.u.spec();
    const double t_remap = s.u.t_remap();
    const double align = g.lx / g.ly;

    // Land exactly on the next aligned time if the step would cross it.
    const double tilt = s.t - t_remap;
    const double t_align =
        t_remap + align * (std::floor(tilt / align + 1e-9) + 1.0);
    double step = std::min(dt, t_align - s.t);

    const double bound = dns_cfl_bound(s);
    int halvings = 0;
    while (step > bound && halvings < 10) {
        step *= 0.5;
        ++halvings;
    }
    if (step > bound) {
        std::ostringstream os;
        os << "dns_step: CFL bound " << bound << " still violated after 10 "
           << "halvings at t = " << s.t;
        throw std::runtime_error(os.str());
    }

    const double t0 = s.t, tm = t0 + 0.5 * step, te = t0 + step;
    const auto e0m = decay_factors(g, s.nu, t_remap, t0, tm);
    const auto eme = decay_factors(g, s.nu, t_remap, tm, te);
    std::vector<double> e0e(e0m.size());
    for (std::size_t i = 0; i < e0e.size(); ++i) e0e[i] = e0m[i] * eme[i];

    DnsState work = s;
    const VectorField k1 = dns_rhs(work);

    work.t = tm;
    work.u = stage_state(s.u, k1, 0.5 * step, e0m);
    const VectorField k2 = dns_rhs(work);

    work.u = stage_state(s.u, k2, 0.0, e0m);   // e0m*u, k2 added below at raw weight
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < e0m.size(); ++i)
            work.u[c].a[i] += 0.5 * step * k2[c].a[i];
    const VectorField k3 = dns_rhs(work);

    work.t = te;
    work.u = stage_state(s.u, k3, 0.0, e0e);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < e0e.size(); ++i)
            work.u[c].a[i] += step * eme[i] * k3[c].a[i];
    const VectorField k4 = dns_rhs(work);

    DnsState out = s;
    out.t = te;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < e0e.size(); ++i)
            out.u[c].a[i] = e0e[i] * s.u[c].a[i] +
                            step / 6.0 *
                                (e0e[i] * k1[c].a[i] +
                                 2.0 * eme[i] * (k2[c].a[i] + k3[c].a[i]) +
                                 k4[c].a[i]);

    out.u = project_divergence_free(out.u, out.t);
    for (int c = 0; c < 3; ++c) {
        apply_dealias(out.u[c]);
        hermitianize(out.u[c]);
    }

    if (std::abs(out.t - t_align) < 1e-9) {
        const double before = energy(out.u);
        RemapResult rr = remap(out.u, out.t);
        out.u = std::move(rr.field);
        for (int c = 0; c < 3; ++c) apply_dealias(out.u[c]);
        out.dropped_energy += std::max(0.0, before - energy(out.u));
        ++out.remaps;
    }

    if (!all_finite(out.u)) throw BlowupError(out.t);
    ++out.steps;
    out.last_halvings = halvings;
    return out;
}

DnsState dns_advance(DnsState s, double t_end, double dt,
                     const std::function<void(const DnsState&)>& on_step) {
    while (t_end - s.t > 1e-12) {
        const double before = s.t;
        s = dns_step(s, std::min(dt, t_end - s.t));
        if (!(s.t > before))
            throw std::runtime_error("dns_advance: step made no progress");
        if (on_step) on_step(s);
    }
    return s;
}

// ============================================================================
// Diagnostics
// ============================================================================

VectorField q_fields(const DnsState& s) {
    const GridSpec& g = s.u.spec();
    const double tau = s.t - s.u.t_remap();
    VectorField q = s.u;
    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy) {
            for (int iz = 0; iz < g.nz; ++iz) {
                const double sym =
                    laplacian_l_symbol(g.kx(ix), g.eta(iy), g.kz(iz), tau);
                const std::size_t i = g.idx(ix, iy, iz);
                for (int c = 0; c < 3; ++c) q[c].a[i] *= sym;
            }
        }
    return q;
}

std::vector<cplx> forcing_functional(const DnsState& s, int alpha) {
    if (alpha < 1 || alpha > 3)
        throw std::invalid_argument("forcing_functional: alpha must be 1, 2, or 3");
    const GridSpec& g = s.u.spec();

    std::array<SpectralField, 3> uneq{s.u[0], s.u[1], s.u[2]};
    for (int c = 0; c < 3; ++c)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int iz = 0; iz < g.nz; ++iz)
                uneq[c].a[g.idx(0, iy, iz)] = cplx(0.0, 0.0);

    const SpectralField p2 = multiply_dealiased(uneq[1], uneq[alpha - 1]);
    const SpectralField p3 = multiply_dealiased(uneq[2], uneq[alpha - 1]);

    const StreakGrid sg = streak_grid_of(g);
    std::vector<cplx> out(sg.size(), cplx(0.0, 0.0));
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz)
            out[sg.idx(iy, iz)] =
                -cplx(0.0, sg.eta(iy)) * p2.at(0, iy, iz) -
                cplx(0.0, sg.kz(iz)) * p3.at(0, iy, iz);
    return out;
}

// ============================================================================
// Weighted-norm series
// ============================================================================

NormProfiles build_norm_profiles(const GridSpec& box, const NormParams& p,
                                 double t_max) {
    if (box.size() == 0) throw std::invalid_argument("build_norm_profiles: empty grid");
    if (!(t_max >= 0.0)) throw std::invalid_argument("build_norm_profiles: bad t_max");
    p.validate();

    double k_max = 0.0, eta_max = 0.0;
    for (int ix = 0; ix < box.nx; ++ix)
        if (box.in_dealias_band(ix, 0, 0)) k_max = std::max(k_max, std::abs(box.kx(ix)));
    for (int iy = 0; iy < box.ny; ++iy)
        if (box.in_dealias_band(0, iy, 0))
            eta_max = std::max(eta_max, std::abs(box.eta(iy)));

    NormProfiles prof;
    prof.params = p;
    prof.box = box;
    prof.eta_spacing = 2.0 * pi / box.ly;
    const double reach = eta_max + t_max * k_max;
    const long half = std::lround(std::ceil(reach / prof.eta_spacing));
    prof.eta_abs_max = half * prof.eta_spacing;
    prof.fns.reserve(2 * half + 1);
    for (long j = -half; j <= half; ++j)
        prof.fns.emplace_back(j * prof.eta_spacing, p.kappa);
    return prof;
}

const WeightFn& profile_for(const NormProfiles& prof, double eta) {
    const long j = std::lround((eta + prof.eta_abs_max) / prof.eta_spacing);
    if (j < 0 || j >= static_cast<long>(prof.fns.size()) ||
        std::abs(j * prof.eta_spacing - prof.eta_abs_max - eta) >
            1e-9 * std::max(1.0, std::abs(eta))) {
        std::ostringstream os;
        os << "profile_for: eta = " << eta << " outside the covered lattice (|eta| <= "
           << prof.eta_abs_max << ")";
        throw std::out_of_range(os.str());
    }
    return prof.fns[static_cast<std::size_t>(j)];
}

namespace {

// Overflow-safe || . || from log-scale terms: exp(max) * sqrt(meas * sum e^{2(x-max)}).
double norm_from_log_terms(const std::vector<double>& log_terms, double meas) {
    if (log_terms.empty()) return 0.0;
    const double m = *std::max_element(log_terms.begin(), log_terms.end());
    if (!std::isfinite(m)) return 0.0;
    double sum = 0.0;
    for (double x : log_terms) sum += std::exp(2.0 * (x - m));
    return std::exp(m) * std::sqrt(meas * sum);
}

} // namespace

NormRecord norm_series(const DnsState& s, const NormProfiles& prof) {
    const GridSpec& g = s.u.spec();
    if (!(g == prof.box))
        throw std::invalid_argument("norm_series: profiles built for a different grid");

    const VectorField q = q_fields(s);
    const double t_remap = s.u.t_remap();
    const double meas = 2.0 * pi / g.ly;

    NormRecord rec;
    rec.t = s.t;
    rec.energy_by_kx.assign(g.nx / 2 + 1, 0.0);

    std::array<std::vector<double>, 3> la, lanu;
    for (int ix = 0; ix < g.nx; ++ix) {
        const double k = g.kx(ix);
        const int kmag = std::abs(GridSpec::mode_of(ix, g.nx));
        for (int iy = 0; iy < g.ny; ++iy) {
            const double eta0 = g.eta(iy) + t_remap * k;
            const WeightFn* wf = nullptr;
            for (int iz = 0; iz < g.nz; ++iz) {
                const std::size_t i = g.idx(ix, iy, iz);
                double mode_e = 0.0;
                for (int c = 0; c < 3; ++c) mode_e += std::norm(s.u[c].a[i]);
                mode_e *= meas;
                rec.energy_by_kx[kmag] += mode_e;
                (k == 0.0 ? rec.e_zero : rec.e_neq) += mode_e;

                const double l = g.kz(iz);
                for (int c = 0; c < 3; ++c) {
                    const double amp = std::abs(q[c].a[i]);
                    if (amp == 0.0) continue;
                    if (!wf) wf = &profile_for(prof, eta0);
                    const double lq = std::log(amp);
                    la[c].push_back(
                        lq + log_norm_A(c + 1, k, eta0, l, s.t, prof.params, *wf));
                    const double anu =
                        log_norm_Anu(c + 1, k, eta0, l, s.t, prof.params, *wf);
                    if (std::isfinite(anu)) lanu[c].push_back(lq + anu);
                }
            }
        }
    }
    for (int c = 0; c < 3; ++c) {
        rec.a_q[c] = norm_from_log_terms(la[c], meas);
        rec.anu_q[c] = norm_from_log_terms(lanu[c], meas);
    }
    rec.u_neq = std::sqrt(rec.e_neq);
    rec.u_zero = std::sqrt(rec.e_zero);
    return rec;
}

// ============================================================================
// Initial data
// ============================================================================

VectorField gevrey_random_field(const GridSpec& g, double eps, double lambda,
                                double s, std::uint64_t seed) {
    if (g.size() == 0) throw std::invalid_argument("gevrey_random_field: empty grid");
    if (!(eps >= 0.0) || !(lambda >= 0.0) || !(s > 0.0) || s >= 1.0)
        throw std::invalid_argument("gevrey_random_field: bad parameters");

    VectorField v(g);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (int ix = 0; ix < g.nx; ++ix)
        for (int iy = 0; iy < g.ny; ++iy)
            for (int iz = 0; iz < g.nz; ++iz) {
                const int mx = GridSpec::mode_of(ix, g.nx);
                const int my = GridSpec::mode_of(iy, g.ny);
                const int mz = GridSpec::mode_of(iz, g.nz);
                // One draw per Hermitian pair, taken at its positive member.
                const bool lead =
                    mx > 0 || (mx == 0 && my > 0) || (mx == 0 && my == 0 && mz > 0);
                if (!lead || !g.in_dealias_band(ix, iy, iz)) continue;

                const double mag =
                    std::abs(g.kx(ix)) + std::abs(g.eta(iy)) + std::abs(g.kz(iz));
                const double env = std::exp(-lambda * std::pow(mag, s));
                const std::size_t ip = g.idx(ix, iy, iz);
                const std::size_t in = g.idx(GridSpec::index_of(-mx, g.nx),
                                             GridSpec::index_of(-my, g.ny),
                                             GridSpec::index_of(-mz, g.nz));
                for (int c = 0; c < 3; ++c) {
                    const cplx a = env * cplx(gauss(rng), gauss(rng));
                    v[c].a[ip] = a;
                    v[c].a[in] = std::conj(a);
                }
            }

    v = project_divergence_free(v, 0.0);
    for (int c = 0; c < 3; ++c) {
        apply_dealias(v[c]);
        hermitianize(v[c]);
        v[c].a[g.idx(0, 0, 0)] = cplx(0.0, 0.0);
    }
    const double en = energy(v);
    if (en > 0.0 && eps > 0.0) {
        const double scale = eps / std::sqrt(en);
        for (int c = 0; c < 3; ++c)
            for (cplx& a : v[c].a) a *= scale;
    } else {
        for (int c = 0; c < 3; ++c)
            for (cplx& a : v[c].a) a = cplx(0.0, 0.0);
    }
    return v;
}

} // namespace c3d
