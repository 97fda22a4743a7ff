#pragma once

// Tiny dense least-squares helpers used by rate fits and scans.

#include "c3d/common.hpp"

namespace c3d {

// Minimize ||X beta - y|| where X is given by columns. Returns beta.
// Solves the normal equations with partial-pivot Gaussian elimination;
// fine for the handful-of-columns fits used here.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& cols,
                                         const std::vector<double>& y) {
    const std::size_t p = cols.size(), n = y.size();
    if (p == 0 || n < p) throw std::invalid_argument("least_squares: underdetermined");
    for (const auto& c : cols)
        if (c.size() != n) throw std::invalid_argument("least_squares: ragged columns");

    // A = X^T X, b = X^T y
    std::vector<std::vector<double>> A(p, std::vector<double>(p + 1, 0.0));
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t r = 0; r < n; ++r) A[i][j] += cols[i][r] * cols[j][r];
        for (std::size_t r = 0; r < n; ++r) A[i][p] += cols[i][r] * y[r];
    }
    for (std::size_t c = 0; c < p; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < p; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        if (A[c][c] == 0.0) throw std::runtime_error("least_squares: singular normal matrix");
        for (std::size_t r = 0; r < p; ++r) {
            if (r == c) continue;
            const double f = A[r][c] / A[c][c];
            for (std::size_t j = c; j <= p; ++j) A[r][j] -= f * A[c][j];
        }
    }
    std::vector<double> beta(p);
    for (std::size_t i = 0; i < p; ++i) beta[i] = A[i][p] / A[i][i];
    return beta;
}

// R^2 of a fit: 1 - SS_res / SS_tot.
inline double r_squared(const std::vector<double>& y, const std::vector<double>& yhat) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= double(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += sq(y[i] - yhat[i]);
        ss_tot += sq(y[i] - mean);
    }
    return ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
}

} // namespace c3d
