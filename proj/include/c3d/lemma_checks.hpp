#pragma once
// ============================================================================
// Numerical verification harness for the frequency-ratio inequalities that
// the multiplier weights are designed to satisfy.  Each registered check
// evaluates LHS/RHS of one inequality over a randomized-but-adversarial
// sample of frequency/time configurations and reports the largest observed
// ratio (the empirical implied constant) together with where it occurred.
//
// A healthy check has a finite max_ratio on the standard box that stays
// within a factor of two when every box bound is doubled — i.e. the
// inequality really does hold with a constant independent of the box.
//
// Conventions shared by all checks:
//  - |a,b,c| on Gevrey-type exponents is the l1 norm (matches gevrey_norm);
//    on symbols coming from the shear-frame Laplacian it is the l2 norm.
//  - mu in exponential factors e^{mu sqrt(...)} is the measured Gevrey-2
//    depth of the weight family (measure_mu), not an assumed constant.
//  - the exponential-localization constant in the norm-commute check is
//    c = 0.9 with localization threshold theta = 0.4.
// ============================================================================

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "c3d/multiplier.hpp"

namespace c3d {

// Sampling region. Frequencies are |k|,|k'| <= kmax (integers), |eta|,|xi|
// <= eta_max (real), |l|,|l'| <= lmax (integers), t in [t_min, t_max].
struct LemmaBox {
    int kmax = 8;
    double eta_max = 256.0;
    int lmax = 8;
    double t_min = 1.0;
    double t_max = 512.0;

    LemmaBox doubled() const {
        return LemmaBox{2 * kmax, 2.0 * eta_max, 2 * lmax, t_min, 2.0 * t_max};
    }
};

// One evaluated configuration. Fields that a given check does not use are
// left at zero. lhs and rhs are the two sides of the inequality as evaluated
// (after exponential factors), so ratio = lhs/rhs.
struct LemmaSample {
    double t = 0.0;
    double k = 0.0, kp = 0.0;
    double eta = 0.0, xi = 0.0;
    double l = 0.0, lp = 0.0;
    double lhs = 0.0, rhs = 0.0;
};

struct LemmaReport {
    std::string lemma_id;
    LemmaBox box;
    std::size_t samples_evaluated = 0;
    double max_ratio = 0.0;
    LemmaSample argmax;
    bool finite = true;  // false if any evaluated ratio was NaN/inf
};

// The registered check ids:
//   gevrey2-depth   log(1/w(1,eta))/sqrt(eta) approaches a common limit mu/2
//                   (after removing the fitted p*log(eta)+c correction)
//   dtw-resonant    on resonant intervals, (d/dt log w) is comparable to
//                   kappa/(1+|eta/r-t|) + kappa|r|/t  (finite differences)
//   w-shift         w(t,eta)/w(t,xi) <= C e^{mu |eta-xi|^{1/2}}
//   w3-swap         w3_{k'}(t,eta)/w3_k(t,xi) <= C (t/(|k|+|eta-kt|)) e^{mu |k-k',eta-xi|^{1/2}}
//                   checked in the doubly-resonant regime t in I(k,eta) and
//                   I(k,xi) with k != k', where the factor is sharp (taken
//                   unconditionally the factor is beaten by the trivial
//                   diagonal eta=xi, k=k' at small t)
//   w3-swap-improved  same ratio <= C e^{mu |...|^{1/2}} when t is not in a
//                   resonant interval of (k,eta), or k=k', or the (k,eta)
//                   interval is active but the (k,xi) one is not
//   w3-swap-gain    same ratio <= C ((|k'|+|xi-k't|)/t) e^{mu |...|^{1/2}}
//                   when t is in a resonant interval of (k',xi) and k != k'
//   norm-commute    A^i_k(t,eta,l) <= C Gamma(i,j,a,b) A^j_{k'}(t,xi,l')
//                   e^{c lambda(t) |delta|^s + 2 mu |eta-xi|^{1/2} + mu |l-l'|^{1/2}}
//                   under the localization |delta| <= theta |k,eta,l| with
//                   delta = (k-k',eta-xi,l-l'), for i in {1,2}, j in {1,2,3};
//                   the mu terms carry the weight-shift cost that the bare
//                   Gevrey factor only absorbs at astronomically large |delta|
//   ckw-shift       sqrt(d/dt log w)(eta) + |k,eta,l|^{s/2}/<t>^s is
//                   controlled by the same expression at (k',xi,l') times
//                   <k-k',eta-xi,l-l'>^2
//   ckwL-shift      sqrt(d/dt log wL)(k,eta,l) <= C sqrt(d/dt log wL)(k,xi,l')
//                   <eta-xi,l-l'>^{3/2}
//   nonres-symbol   (1/|k,eta-kt,l| + 1/|k,xi-kt,l'|) chi_NR <=
//                   C <eta-xi,l-l'>/<k,t,l'>   where chi_NR kills the case of
//                   simultaneously resonant t with small z-frequencies
//   symbol-triangle |eta-kt| <= C <eta-xi>(|k| + |xi-kt|)
//   symbol-longtime (1/|k,eta-kt,l|)<t/<xi,l'>> <= C <eta-xi,l-l'>
std::vector<std::string> registered_lemmas();

// Evaluates the named inequality over `samples` adversarially drawn
// configurations in `box` (deterministic given the id and box).  Throws
// std::invalid_argument for an unregistered id.  params supplies kappa,
// s, delta1 and the lambda(t) schedule where needed.
LemmaReport verify_lemma(const std::string& lemma_id, const LemmaBox& box, std::size_t samples,
                         const NormParams& params = NormParams{});

// True when t lies in the resonant (growth-active) critical interval of the
// signed pair (k, eta): the interval of |eta| indexed by |k| must contain t,
// be flagged resonant, and k must carry the sign of eta.
bool in_resonant_interval(const WeightFn& wf, double k, double t);

// Renders "lemma_id max_ratio argmax(...)" report lines for the CLI.
std::string format_report(const LemmaReport& rep);

}  // namespace c3d
