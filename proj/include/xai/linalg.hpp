#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "xai/error.hpp"
#include "xai/matrix.hpp"

namespace xai {

// Solves A x = b in place via Gaussian elimination with partial pivoting.
// A is n x n. Throws on a singular system.
inline std::vector<double> solve_linear(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) throw data_error("solve_linear: shape mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::fabs(a.at(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::fabs(a.at(r, col));
            if (v > best) { best = v; pivot = r; }
        }
        if (best < 1e-14) throw data_error("solve_linear: singular system");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a.at(col, c), a.at(pivot, c));
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a.at(r, col) / a.at(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a.at(i, c) * x[c];
        x[i] = s / a.at(i, i);
    }
    return x;
}

// Weighted ridge regression with intercept: minimizes
//   sum_i w_i (y_i - b0 - x_i . beta)^2 + penalty * |beta|^2.
// The intercept is unpenalized. Returns (intercept, beta).
// Degenerate (all-zero weight or singular) systems fall back to the weighted
// mean intercept with zero coefficients.
inline std::pair<double, std::vector<double>> weighted_ridge(
    const Matrix& x, const std::vector<double>& y, const std::vector<double>& w,
    double penalty) {
    const std::size_t n = x.rows, d = x.cols;
    const std::size_t p = d + 1;  // intercept slot 0
    Matrix ata(p, p);
    std::vector<double> atb(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w[i];
        if (wi == 0.0) continue;
        auto xi = x.row(i);
        ata.at(0, 0) += wi;
        atb[0] += wi * y[i];
        for (std::size_t j = 0; j < d; ++j) {
            ata.at(0, j + 1) += wi * xi[j];
            ata.at(j + 1, 0) += wi * xi[j];
            atb[j + 1] += wi * xi[j] * y[i];
            for (std::size_t k = 0; k < d; ++k)
                ata.at(j + 1, k + 1) += wi * xi[j] * xi[k];
        }
    }
    for (std::size_t j = 1; j < p; ++j) ata.at(j, j) += penalty;
    try {
        auto sol = solve_linear(ata, atb);
        return {sol[0], std::vector<double>(sol.begin() + 1, sol.end())};
    } catch (const Error&) {
        double sw = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) { sw += w[i]; sy += w[i] * y[i]; }
        return {sw > 0.0 ? sy / sw : 0.0, std::vector<double>(d, 0.0)};
    }
}

// Ordinary least squares with intercept (unweighted, unpenalized).
inline std::pair<double, std::vector<double>> least_squares(
    const Matrix& x, const std::vector<double>& y) {
    return weighted_ridge(x, y, std::vector<double>(x.rows, 1.0), 0.0);
}

}  // namespace xai
