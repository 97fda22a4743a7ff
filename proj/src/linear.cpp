#include "c3d/linear.hpp"

#include "c3d/fit.hpp"

#include <algorithm>
#include <cmath>

namespace c3d {

namespace {

struct Coupling {
    cplx n1, n2, n3;
};

// Non-viscous part of the q-system at one instant. With e = eta - k t and
// m2 = k^2 + e^2 + l^2 (so the Laplacian symbol is -m2, u^i = -q^i/m2):
//   q1' = -2 k e q1 / m2 - q2 + 2 k^2 q2 / m2
//   q2' = 0
//   q3' = -2 k e q3 / m2 + 2 k l q2 / m2
// The -2ke/m2 pieces are the stretching 2 dxy u^i, the 2k^2/m2 and 2kl/m2
// pieces the pressure sources 2 dxx u2 and 2 dzx u2.
Coupling coupling(const ModeState& s, double t) {
    const double e = s.eta - s.k * t;
    const double m2 = s.k * s.k + e * e + s.l * s.l;
    if (m2 == 0.0) return {cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)};
    const double stretch = -2.0 * s.k * e / m2;
    Coupling c;
    c.n1 = stretch * s.q1 + (2.0 * s.k * s.k / m2 - 1.0) * s.q2;
    c.n2 = cplx(0.0, 0.0);
    c.n3 = stretch * s.q3 + (2.0 * s.k * s.l / m2) * s.q2;
    return c;
}

ModeState with_q(const ModeState& s, cplx q1, cplx q2, cplx q3) {
    ModeState r = s;
    r.q1 = q1;
    r.q2 = q2;
    r.q3 = q3;
    return r;
}

} // namespace

std::array<cplx, 3> mode_velocity(const ModeState& s) {
    const double sym = laplacian_l_symbol(s.k, s.eta, s.l, s.t);
    if (sym == 0.0) return {cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)};
    return {s.q1 / sym, s.q2 / sym, s.q3 / sym};
}

ModeState mode_from_velocity(double k, double eta, double l, cplx u1, cplx u2,
                             cplx u3, double t) {
    const double sym = laplacian_l_symbol(k, eta, l, t);
    ModeState s;
    s.k = k;
    s.eta = eta;
    s.l = l;
    s.t = t;
    s.q1 = sym * u1;
    s.q2 = sym * u2;
    s.q3 = sym * u3;
    return s;
}

double visc_integral(double k, double eta, double l, double a, double b) {
    const double c0 = k * k + eta * eta + l * l;
    const double c1 = -eta * k;
    const double c2 = k * k / 3.0;
    return c0 * (b - a) + c1 * (b * b - a * a) + c2 * (b * b * b - a * a * a);
}

ModeState linear_mode_step(const ModeState& s, double nu, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("linear_mode_step: dt must be > 0");
    const double t0 = s.t, tm = s.t + 0.5 * dt, te = s.t + dt;
    // Decay factors over the half steps; both <= 1 for nu >= 0, so nothing
    // here can overflow no matter how long the run gets.
    const double e0m = std::exp(-nu * visc_integral(s.k, s.eta, s.l, t0, tm));
    const double eme = std::exp(-nu * visc_integral(s.k, s.eta, s.l, tm, te));
    const double e0e = e0m * eme;

    const Coupling k1 = coupling(s, t0);
    const Coupling k2 = coupling(with_q(s, e0m * (s.q1 + 0.5 * dt * k1.n1),
                                        e0m * (s.q2 + 0.5 * dt * k1.n2),
                                        e0m * (s.q3 + 0.5 * dt * k1.n3)),
                                 tm);
    const Coupling k3 = coupling(with_q(s, e0m * s.q1 + 0.5 * dt * k2.n1,
                                        e0m * s.q2 + 0.5 * dt * k2.n2,
                                        e0m * s.q3 + 0.5 * dt * k2.n3),
                                 tm);
    const Coupling k4 = coupling(with_q(s, eme * (e0m * s.q1 + dt * k3.n1),
                                        eme * (e0m * s.q2 + dt * k3.n2),
                                        eme * (e0m * s.q3 + dt * k3.n3)),
                                 te);

    ModeState r = s;
    r.t = te;
    r.q1 = e0e * s.q1 + dt / 6.0 * (e0e * k1.n1 + 2.0 * eme * (k2.n1 + k3.n1) + k4.n1);
    r.q2 = e0e * s.q2 + dt / 6.0 * (e0e * k1.n2 + 2.0 * eme * (k2.n2 + k3.n2) + k4.n2);
    r.q3 = e0e * s.q3 + dt / 6.0 * (e0e * k1.n3 + 2.0 * eme * (k2.n3 + k3.n3) + k4.n3);
    return r;
}

double default_mode_dt(const ModeState& s, double tmax) {
    const double e0 = std::abs(s.eta - s.k * s.t);
    const double e1 = std::abs(s.eta - s.k * tmax);
    const double kmax = std::sqrt(s.k * s.k + std::max(e0, e1) * std::max(e0, e1) +
                                  s.l * s.l);
    return std::min(0.01, 0.1 / std::max(kmax, 1.0));
}

VectorField zero_mode_evolution(const VectorField& u_in, double nu, double t) {
    const GridSpec& g = u_in.spec();
    for (int c = 0; c < 3; ++c)
        for (int ix = 0; ix < g.nx; ++ix) {
            if (GridSpec::mode_of(ix, g.nx) == 0) continue;
            for (int iy = 0; iy < g.ny; ++iy)
                for (int iz = 0; iz < g.nz; ++iz)
                    if (u_in[c].at(ix, iy, iz) != cplx(0.0, 0.0))
                        throw std::invalid_argument(
                            "zero_mode_evolution: input has k != 0 content");
        }

    VectorField out = u_in;
    const int ix0 = GridSpec::index_of(0, g.nx);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int iz = 0; iz < g.nz; ++iz) {
            const double eta = g.eta(iy), l = g.kz(iz);
            const double heat = std::exp(-nu * t * (eta * eta + l * l));
            const cplx u1 = u_in[0].at(ix0, iy, iz), u2 = u_in[1].at(ix0, iy, iz);
            out[0].at(ix0, iy, iz) = heat * (u1 - t * u2);
            out[1].at(ix0, iy, iz) = heat * u2;
            out[2].at(ix0, iy, iz) = heat * u_in[2].at(ix0, iy, iz);
        }
    return out;
}

RateFit fit_rates(const std::vector<std::pair<double, double>>& series, RateModel model) {
    if (series.size() < 8)
        throw std::invalid_argument("fit_rates: need at least 8 samples");
    const std::size_t n = series.size();
    std::vector<double> reg(n), ones(n, 1.0), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = series[i].first, v = series[i].second;
        switch (model) {
        case RateModel::power_law:
            if (!(t > 0.0) || !(v > 0.0))
                throw std::invalid_argument("fit_rates: power_law needs t > 0, value > 0");
            reg[i] = std::log(t);
            y[i] = std::log(v);
            break;
        case RateModel::cubic_exp:
            if (!(v > 0.0))
                throw std::invalid_argument("fit_rates: cubic_exp needs value > 0");
            reg[i] = t * t * t;
            y[i] = std::log(v);
            break;
        case RateModel::linear:
            reg[i] = t;
            y[i] = v;
            break;
        }
    }
    const std::vector<double> beta = least_squares({reg, ones}, y);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += sq(y[i] - beta[0] * reg[i] - beta[1]);
    return {beta[0], std::sqrt(ss / double(n))};
}

} // namespace c3d
