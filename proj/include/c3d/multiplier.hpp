#pragma once

// Resonance bookkeeping and the time-frequency multiplier weights.
//
// For each y-frequency eta the time axis splits into critical intervals
// indexed by the x-frequency k whose mode is closest to resonance
// (t near eta/k). On those intervals the weight w loses a fixed power of
// (k^2/eta) per interval; two slow "extra loss" integrals are peeled off on
// top, and several derived weights (w3 boosts, the l-aware w_L, the
// dissipation clock D) feed the norm family evaluated at the bottom of this
// header. Everything here is closed-form and evaluated pointwise in log
// space; tabulation is a convenience layer on the same expressions.

#include "c3d/common.hpp"

#include <map>
#include <optional>

namespace c3d {

// ============================================================================
// Critical times and intervals
// ============================================================================

// k >= 1: |eta/k| - |eta| / (2|k|(|k|+1)); k == 0: 2|eta|.
double critical_time(int k, double eta);

// Number of critical intervals: floor(sqrt(|eta|)) for |eta| > 1, else 0.
int resonance_count(double eta);

struct CriticalEntry {
    int k = 0;              // 1 .. floor(sqrt(|eta|)); x-frequency magnitude
    double t_left = 0.0;    // critical_time(k)
    double t_right = 0.0;   // critical_time(k-1); t_right of k=1 is 2|eta|
    double t_res = 0.0;     // |eta|/k, the exact resonance inside the interval
    bool resonant = false;  // interval counts as resonant iff 2 sqrt|eta| <= t_left
};

struct CriticalIndex {
    double eta = 0.0;                  // stored as |eta|
    std::vector<CriticalEntry> entries;  // ordered k = 1,2,...; empty for |eta| <= 1

    // Entry index of the interval containing t, or nullopt when t is outside
    // all critical intervals (t >= 2|eta| or t < t_left of the last entry).
    std::optional<std::size_t> interval_at(double t) const;
};

CriticalIndex build_critical_index(double eta);

struct ResonanceCoeffs {
    double a = 0.0;  // left-side decay coefficient
    double b = 0.0;  // right-side growth coefficient
};

// b = 2(k-1)/k * (1 - k^2/|eta|) for k >= 2, b = 1 - 1/|eta| for k = 1;
// a = 2(k+1)/k * (1 - k^2/|eta|). Requires 1 <= k <= floor(sqrt(|eta|)).
ResonanceCoeffs resonance_coeffs(int k, double eta);

// ============================================================================
// The weight w (pointwise, closed form, log space)
// ============================================================================

class WeightFn {
public:
    WeightFn(double eta, double kappa);

    double eta_abs() const { return eta_; }
    double eta_signed() const { return eta_signed_; }
    double kappa() const { return kappa_; }
    const CriticalIndex& index() const { return idx_; }

    // Piecewise-power core profile, built backward from wbar = 1 at t >= 2|eta|.
    double log_wbar(double t) const;

    // Full weight: wbar times the two extra-loss factors
    //   exp(-kappa * (2 sqrt|eta| - t)_+ )  and
    //   exp(-kappa * |eta| (1/max(t, sqrt|eta|) - 1/(2|eta|))_+ ).
    double log_w(double t) const;
    double w(double t) const { return std::exp(log_w(t)); }

    // Exact piecewise d/dt log w (right-derivative at breakpoints).
    double dlog_w_dt(double t) const;

    // Interval-boosted weight for x-frequency kprime (signed). Inside the
    // interval of resonant frequency k (same sign as eta), every other
    // frequency pays w3/w = |eta| / (k^2 (1 + b|t - eta/k|)) on the right of
    // the resonance (a on the left); outside all intervals w3 = w.
    double log_w3(int kprime, double t) const;

    // log(w3/w) >= 0; zero off critical intervals and for kprime resonant.
    double log_w3_boost(int kprime, double t) const;

private:
    double eta_;          // |eta|
    double eta_signed_;
    double kappa_;
    CriticalIndex idx_;
    std::vector<double> log_wbar_at_right_;  // log wbar(t_{k-1}) per entry
    double log_wbar_floor_ = 0.0;            // value at and below the last breakpoint
};

// ============================================================================
// Tabulated profile (uniform lattice + breakpoints; exact at the nodes)
// ============================================================================

struct MultiplierProfile {
    double eta = 0.0;
    double kappa = 0.0;
    std::vector<double> t_grid;
    std::vector<double> wbar, w;              // linear scale (may underflow for huge eta)
    std::vector<double> log_wbar, log_w;      // always finite
    std::map<int, std::vector<double>> log_w3;  // per requested kprime
};

MultiplierProfile build_profile(double eta, double kappa,
                                const std::vector<double>& t_lattice = {},
                                const std::vector<int>& w3_kprimes = {});

// ============================================================================
// w_L and the dissipation clock D
// ============================================================================

// log of the l-aware multiplier: dlog wL/dt = kappa |k| <l> / (k^2+l^2+(eta-kt)^2),
// wL(1) = 1, constant 1 for k = 0 and for t <= 1; closed form via arctan.
double log_wL(double t, double k, double eta, double l, double kappa);
double dlog_wL_dt(double t, double k, double eta, double l, double kappa);

// D(t,eta) = nu|eta|^3/(3 alpha) + nu (t^3 - 8|eta|^3)_+ / (24 alpha).
double dissipation_clock(double t, double eta, double nu, double alpha);

// ============================================================================
// Norm family
// ============================================================================

struct NormParams {
    double kappa = 8.0;
    double lambda0 = 1.0;       // Gevrey radius of the data class
    double lambda_inf = 0.5;    // infimum the radius may decay toward
    double delta_lambda = 0.01; // decay budget of lambda(t)
    double s = 0.6;             // Gevrey exponent, in (1/2, 1)
    double alpha = 10.0;
    double delta1 = 0.01;
    double beta = 3.0 * 10.0 + 8.0;           // > 3 alpha + 7
    double gamma = (3.0 * 10.0 + 8.0) + 3.0 * 10.0 + 13.0;  // > beta + 3 alpha + 12
    double sigma = ((3.0 * 10.0 + 8.0) + 3.0 * 10.0 + 13.0) + 7.0;  // > gamma + 6
    double mu = 0.0;            // Gevrey-2 radius; fill via with_measured_mu()
    double nu = 1e-4;           // viscosity used by the A^nu family

    void validate() const;     // throws std::invalid_argument on bad orderings

    // lambda(1) = 3/4 lambda0 + 1/4 lambda_inf; decays with rate
    // delta_lambda / <t>^{min(2s, 3/2)}. Monotone, bounded below.
    double lambda(double t) const;

    NormParams with_measured_mu() const;  // mu := measure_mu(kappa)
};

// Limit slope of -log w(1, eta) / sqrt(eta) (times 2), fitted over large eta
// with a polynomial-in-log correction.
double measure_mu(double kappa);

enum class NormFamily { plain, tilde };

// log A^Q_k(t, eta, l). Family 'tilde' drops the +e^{mu sqrt|l|} branch.
double log_norm_AQ(double k, double eta, double l, double t, const NormParams& p,
                   const WeightFn& wf, NormFamily fam = NormFamily::plain);

// log A^i_k for i = 1, 2, 3 (the i = 3 case swaps w -> w3_k inside A^Q).
double log_norm_A(int i, double k, double eta, double l, double t, const NormParams& p,
                  const WeightFn& wf, NormFamily fam = NormFamily::plain);

// log of the zero-frequency norm <eta,l>^2 A^Q_0.
double log_norm_A_zero(double eta, double l, double t, const NormParams& p,
                       const WeightFn& wf, NormFamily fam = NormFamily::plain);

// log A^{nu;i}_k, i = 0 (bare), 1, 2, 3. Zero x-frequency is excluded
// (returns -inf, matching the indicator).
double log_norm_Anu(int i, double k, double eta, double l, double t, const NormParams& p,
                    const WeightFn& wf);

// Convenience linear-scale wrapper (may overflow to +inf for large frequencies).
double norm_A(int i, double k, double eta, double l, double t, const NormParams& p,
              const WeightFn& wf, NormFamily fam = NormFamily::plain);

} // namespace c3d
