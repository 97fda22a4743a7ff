#include "c3d/multiplier.hpp"

#include "c3d/fit.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace c3d {

// ============================================================================
// Critical times and intervals
// ============================================================================

double critical_time(int k, double eta) {
    const double e = std::abs(eta);
    if (k == 0) return 2.0 * e;
    const double ka = std::abs(double(k));
    return e / ka - e / (2.0 * ka * (ka + 1.0));
}

int resonance_count(double eta) {
    const double e = std::abs(eta);
    if (e <= 1.0) return 0;
    return int(std::floor(std::sqrt(e)));
}

CriticalIndex build_critical_index(double eta) {
    CriticalIndex idx;
    idx.eta = std::abs(eta);
    const int kmax = resonance_count(eta);
    const double thresh = 2.0 * std::sqrt(idx.eta);
    idx.entries.reserve(kmax);
    for (int k = 1; k <= kmax; ++k) {
        CriticalEntry e;
        e.k = k;
        e.t_left = critical_time(k, idx.eta);
        e.t_right = critical_time(k - 1, idx.eta);
        e.t_res = idx.eta / k;
        e.resonant = thresh <= e.t_left;
        idx.entries.push_back(e);
    }
    return idx;
}

std::optional<std::size_t> CriticalIndex::interval_at(double t) const {
    if (entries.empty()) return std::nullopt;
    if (t >= entries.front().t_right || t < entries.back().t_left) return std::nullopt;
    // t_left decreases with entry index; find the first entry with t_left <= t
    std::size_t lo = 0, hi = entries.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (entries[mid].t_left <= t)
            hi = mid;
        else
            lo = mid + 1;
    }
    return entries[lo].t_left <= t && t < entries[lo].t_right ? std::optional(lo) : std::nullopt;
}

ResonanceCoeffs resonance_coeffs(int k, double eta) {
    const double e = std::abs(eta);
    const int ka = std::abs(k);
    if (ka < 1 || ka > resonance_count(eta))
        throw std::invalid_argument("resonance_coeffs: k outside 1..floor(sqrt(|eta|))");
    ResonanceCoeffs c;
    const double k2e = double(ka) * ka / e;
    c.a = 2.0 * (ka + 1.0) / ka * (1.0 - k2e);
    c.b = ka == 1 ? 1.0 - 1.0 / e : 2.0 * (ka - 1.0) / ka * (1.0 - k2e);
    return c;
}

// ============================================================================
// WeightFn
// ============================================================================

WeightFn::WeightFn(double eta, double kappa)
    : eta_(std::abs(eta)), eta_signed_(eta), kappa_(kappa), idx_(build_critical_index(eta)) {
    if (!(kappa > 0.0)) throw std::invalid_argument("WeightFn: kappa must be positive");
    // log wbar at the right endpoint of each interval k: the product of the
    // (j^2/|eta|)^{1+2 kappa} drops across intervals j < k; via lgamma.
    log_wbar_at_right_.resize(idx_.entries.size());
    const double le = std::log(std::max(eta_, 1.0));
    for (std::size_t i = 0; i < idx_.entries.size(); ++i) {
        const double k = double(idx_.entries[i].k);
        log_wbar_at_right_[i] = (1.0 + 2.0 * kappa_) * (2.0 * std::lgamma(k) - (k - 1.0) * le);
    }
    if (!idx_.entries.empty()) {
        const double km = double(idx_.entries.back().k);
        log_wbar_floor_ = (1.0 + 2.0 * kappa_) * (2.0 * std::lgamma(km + 1.0) - km * le);
    }
}

double WeightFn::log_wbar(double t) const {
    if (eta_ <= 1.0 || idx_.entries.empty()) return 0.0;
    if (t >= 2.0 * eta_) return 0.0;
    if (t < idx_.entries.back().t_left) return log_wbar_floor_;
    const auto at = idx_.interval_at(t);
    if (!at) return 0.0;  // unreachable: intervals tile [t_kmax, 2|eta|)
    const CriticalEntry& e = idx_.entries[*at];
    const ResonanceCoeffs c = resonance_coeffs(e.k, eta_);
    const double lk2e = std::log(double(e.k) * e.k / eta_);
    const double base = log_wbar_at_right_[*at];
    if (t >= e.t_res)
        return kappa_ * (lk2e + std::log1p(c.b * (t - e.t_res))) + base;
    return kappa_ * lk2e - (1.0 + kappa_) * std::log1p(c.a * (e.t_res - t)) + base;
}

double WeightFn::log_w(double t) const {
    // the loss envelope applies at every eta (it self-clips to 0 as eta -> 0),
    // keeping w continuous across the |eta| = 1 threshold where the interval
    // structure disappears
    if (eta_ == 0.0) return 0.0;
    const double tc = std::max(t, 0.0);
    const double se = std::sqrt(eta_);
    double loss = kappa_ * std::max(2.0 * se - tc, 0.0);
    const double lo = std::max(tc, se);
    if (lo < 2.0 * eta_) loss += kappa_ * eta_ * (1.0 / lo - 1.0 / (2.0 * eta_));
    return log_wbar(t) - loss;
}

double WeightFn::dlog_w_dt(double t) const {
    if (eta_ == 0.0) return 0.0;
    const double se = std::sqrt(eta_);
    double d = 0.0;
    if (t >= 0.0 && t <= 2.0 * se) d += kappa_;
    if (t >= se && t <= 2.0 * eta_) d += kappa_ * eta_ / (t * t);
    const auto at = idx_.interval_at(t);
    if (at) {
        const CriticalEntry& e = idx_.entries[*at];
        const ResonanceCoeffs c = resonance_coeffs(e.k, eta_);
        if (t >= e.t_res)
            d += kappa_ * c.b / (1.0 + c.b * (t - e.t_res));
        else
            d += (1.0 + kappa_) * c.a / (1.0 + c.a * (e.t_res - t));
    }
    return d;
}

double WeightFn::log_w3_boost(int kprime, double t) const {
    const auto at = idx_.interval_at(t);
    if (!at) return 0.0;
    const CriticalEntry& e = idx_.entries[*at];
    const int k_signed = eta_signed_ >= 0.0 ? e.k : -e.k;
    if (kprime == k_signed) return 0.0;
    const ResonanceCoeffs c = resonance_coeffs(e.k, eta_);
    const double lk2e = std::log(double(e.k) * e.k / eta_);
    if (t >= e.t_res) return -(lk2e + std::log1p(c.b * (t - e.t_res)));
    return -(lk2e + std::log1p(c.a * (e.t_res - t)));
}

double WeightFn::log_w3(int kprime, double t) const {
    return log_w(t) + log_w3_boost(kprime, t);
}

// ============================================================================
// Tabulated profile
// ============================================================================

MultiplierProfile build_profile(double eta, double kappa, const std::vector<double>& t_lattice,
                                const std::vector<int>& w3_kprimes) {
    WeightFn wf(eta, kappa);
    MultiplierProfile prof;
    prof.eta = eta;
    prof.kappa = kappa;

    std::set<double> grid(t_lattice.begin(), t_lattice.end());
    if (t_lattice.empty()) {
        const double tmax = 2.0 * std::abs(eta) + 1.0;
        for (int i = 0; i <= 512; ++i) grid.insert(tmax * i / 512.0);
    }
    for (const auto& e : wf.index().entries) {
        grid.insert(e.t_left);
        grid.insert(e.t_right);
        grid.insert(e.t_res);
    }
    prof.t_grid.assign(grid.begin(), grid.end());

    const std::size_t n = prof.t_grid.size();
    prof.wbar.resize(n);
    prof.w.resize(n);
    prof.log_wbar.resize(n);
    prof.log_w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        prof.log_wbar[i] = wf.log_wbar(prof.t_grid[i]);
        prof.log_w[i] = wf.log_w(prof.t_grid[i]);
        prof.wbar[i] = std::exp(prof.log_wbar[i]);
        prof.w[i] = std::exp(prof.log_w[i]);
    }
    for (int kp : w3_kprimes) {
        auto& col = prof.log_w3[kp];
        col.resize(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = wf.log_w3(kp, prof.t_grid[i]);
    }
    return prof;
}

// ============================================================================
// w_L and D
// ============================================================================

double log_wL(double t, double k, double eta, double l, double kappa) {
    if (k == 0.0) return 0.0;
    const double tc = std::max(t, 1.0);
    const double A = std::hypot(k, l);
    const double sgn = k > 0.0 ? 1.0 : -1.0;
    return kappa * jb(l) * sgn / A *
           (std::atan((k * tc - eta) / A) - std::atan((k - eta) / A));
}

double dlog_wL_dt(double t, double k, double eta, double l, double kappa) {
    if (k == 0.0 || t < 1.0) return 0.0;
    const double e = eta - k * t;
    return kappa * std::abs(k) * jb(l) / (k * k + l * l + e * e);
}

double dissipation_clock(double t, double eta, double nu, double alpha) {
    const double e3 = std::abs(eta) * std::abs(eta) * std::abs(eta);
    const double t3 = t * t * t;
    return nu * e3 / (3.0 * alpha) + nu * std::max(t3 - 8.0 * e3, 0.0) / (24.0 * alpha);
}

// ============================================================================
// NormParams
// ============================================================================

void NormParams::validate() const {
    auto bad = [](const std::string& m) { throw std::invalid_argument("NormParams: " + m); };
    if (!(kappa > 0.0)) bad("kappa must be positive");
    if (!(s > 0.5) || !(s < 1.0)) bad("s must lie in (1/2, 1)");
    if (!(lambda0 > lambda_inf) || !(lambda_inf > 0.0)) bad("need lambda0 > lambda_inf > 0");
    if (!(delta_lambda > 0.0) || !(delta1 > 0.0)) bad("decay budgets must be positive");
    if (!(alpha >= 1.0)) bad("alpha must be >= 1");
    if (!(beta > 3.0 * alpha + 7.0)) bad("need beta > 3 alpha + 7");
    if (!(gamma > beta + 3.0 * alpha + 12.0)) bad("need gamma > beta + 3 alpha + 12");
    if (!(sigma > gamma + 6.0)) bad("need sigma > gamma + 6");
    if (!(nu >= 0.0)) bad("nu must be >= 0");
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return adaptive_simpson(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 48);
}

} // namespace

double NormParams::lambda(double t) const {
    const double t1 = std::max(t, 1.0);
    const double p = std::min(2.0 * s, 1.5);
    // memo per (s, delta) is overkill: the integrand is cheap and smooth, and
    // callers hit few distinct t values; cache the largest computed prefix.
    static thread_local std::map<std::pair<double, double>, std::map<double, double>> cache;
    auto& slot = cache[{p, delta_lambda}];
    auto it = slot.find(t1);
    double integral;
    if (it != slot.end()) {
        integral = it->second;
    } else {
        integral = integrate([p](double tau) { return std::pow(1.0 + tau * tau, -p / 2.0); },
                             1.0, t1, 1e-13);
        if (slot.size() < 200000) slot.emplace(t1, integral);
    }
    return 0.75 * lambda0 + 0.25 * lambda_inf - delta_lambda * integral;
}

NormParams NormParams::with_measured_mu() const {
    NormParams p = *this;
    p.mu = measure_mu(kappa);
    return p;
}

double measure_mu(double kappa) {
    static thread_local std::map<double, double> cache;
    auto it = cache.find(kappa);
    if (it != cache.end()) return it->second;
    std::vector<double> se, le, ones, y;
    for (double eta : {1e2, 3e2, 1e3, 3e3, 1e4, 1e5, 1e6}) {
        WeightFn wf(eta, kappa);
        se.push_back(std::sqrt(eta));
        le.push_back(std::log(eta));
        ones.push_back(1.0);
        y.push_back(-wf.log_w(1.0));
    }
    const auto beta = least_squares({se, le, ones}, y);
    cache[kappa] = 2.0 * beta[0];
    return 2.0 * beta[0];
}

// ============================================================================
// Norm family
// ============================================================================

namespace {

// log(e^a + e^b) without overflow
double lse2(double a, double b) {
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// log of min(1, (<eta,l>/t)^pow); t must be positive
double log_min_factor(double eta, double l, double t, double pow_) {
    return pow_ * std::min(0.0, std::log(jb2(eta, l)) - std::log(t));
}

} // namespace

double log_norm_AQ(double k, double eta, double l, double t, const NormParams& p,
                   const WeightFn& wf, NormFamily fam) {
    if (std::abs(wf.eta_abs() - std::abs(eta)) > 1e-6 * std::max(1.0, std::abs(eta)))
        throw std::logic_error("norm evaluation: weight profile built for a different eta");
    const double common = p.lambda(t) * std::pow(l1norm(k, eta, l), p.s) +
                          p.sigma * std::log(jb3(k, eta, l)) - log_wL(t, k, eta, l, p.kappa);
    const double br_eta = p.mu * std::sqrt(std::abs(eta)) - wf.log_w(t);
    if (fam == NormFamily::tilde) return common + br_eta;
    return common + lse2(br_eta, p.mu * std::sqrt(std::abs(l)));
}

double log_norm_A(int i, double k, double eta, double l, double t, const NormParams& p,
                  const WeightFn& wf, NormFamily fam) {
    if (i < 1 || i > 3) throw std::invalid_argument("log_norm_A: i must be 1, 2 or 3");
    if (std::abs(wf.eta_abs() - std::abs(eta)) > 1e-6 * std::max(1.0, std::abs(eta)))
        throw std::logic_error("norm evaluation: weight profile built for a different eta");
    double core;
    if (i == 3) {
        // same shape as A^Q but the weight is the interval-boosted w3_k
        const int ki = int(std::lround(k));
        const double common = p.lambda(t) * std::pow(l1norm(k, eta, l), p.s) +
                              p.sigma * std::log(jb3(k, eta, l)) - log_wL(t, k, eta, l, p.kappa);
        const double br_eta = p.mu * std::sqrt(std::abs(eta)) - wf.log_w3(ki, t);
        core = fam == NormFamily::tilde ? common + br_eta
                                        : common + lse2(br_eta, p.mu * std::sqrt(std::abs(l)));
    } else {
        core = log_norm_AQ(k, eta, l, t, p, wf, fam);
    }
    if (k == 0.0) return i == 1 ? core - std::log(jb(t)) : core;
    switch (i) {
        case 1:
            return core - std::log(jb(t)) +
                   (1.0 + p.delta1) * std::min(0.0, std::log(jb2(eta, l)) - std::log(jb(t)));
        case 2:
            return core + log_min_factor(eta, l, t, 1.0);
        default:
            return core + log_min_factor(eta, l, t, 2.0);
    }
}

double log_norm_A_zero(double eta, double l, double t, const NormParams& p, const WeightFn& wf,
                       NormFamily fam) {
    return 2.0 * std::log(jb2(eta, l)) + log_norm_AQ(0.0, eta, l, t, p, wf, fam);
}

double log_norm_Anu(int i, double k, double eta, double l, double t, const NormParams& p,
                    const WeightFn& wf) {
    (void)wf;
    if (i < 0 || i > 3) throw std::invalid_argument("log_norm_Anu: i must be 0..3");
    if (k == 0.0) return -std::numeric_limits<double>::infinity();
    const double D = dissipation_clock(t, eta, p.nu, p.alpha);
    double v = p.lambda(t) * std::pow(l1norm(k, eta, l), p.s) + p.beta * std::log(jb3(k, eta, l)) +
               p.alpha * std::log(jb(D)) - log_wL(t, k, eta, l, p.kappa);
    switch (i) {
        case 1:
            return v - std::log(jb(t)) +
                   (1.0 + p.delta1) * std::min(0.0, std::log(jb2(eta, l)) - std::log(t));
        case 2:
            return v + log_min_factor(eta, l, t, 1.0);
        case 3:
            return v + log_min_factor(eta, l, t, 2.0);
        default:
            return v;
    }
}

double norm_A(int i, double k, double eta, double l, double t, const NormParams& p,
              const WeightFn& wf, NormFamily fam) {
    return std::exp(log_norm_A(i, k, eta, l, t, p, wf, fam));
}

} // namespace c3d
