#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace c3d {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// Japanese bracket <v> = (1 + |v|^2)^{1/2}; the workhorse weight everywhere.
inline double jb(double v) { return std::sqrt(1.0 + v * v); }
inline double jb2(double a, double b) { return std::sqrt(1.0 + a * a + b * b); }
inline double jb3(double a, double b, double c) {
    return std::sqrt(1.0 + a * a + b * b + c * c);
}

// l^1 frequency magnitude |k,eta,l| used inside Gevrey exponents.
inline double l1norm(double k, double eta, double l) {
    return std::abs(k) + std::abs(eta) + std::abs(l);
}

inline double sq(double x) { return x * x; }

// FNV-1a 64-bit hash; used for reproducible RNG seeding and config digests.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Stable log(sum(exp(x_i))) accumulator for norms whose terms overflow doubles.
class LogSumExp {
public:
    void add(double log_term) {
        if (log_term == -std::numeric_limits<double>::infinity()) return;
        if (terms_.empty() || log_term > max_) max_ = log_term;
        terms_.push_back(log_term);
    }
    bool empty() const { return terms_.empty(); }
    double value() const {  // log of the sum; -inf if no terms
        if (terms_.empty()) return -std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (double t : terms_) s += std::exp(t - max_);
        return max_ + std::log(s);
    }

private:
    std::vector<double> terms_;
    double max_ = -std::numeric_limits<double>::infinity();
};

} // namespace c3d
