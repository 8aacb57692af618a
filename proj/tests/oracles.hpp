#pragma once

// Deliberately naive reference implementations. They share no code with the
// library beyond the Matrix container.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ptai/core/matrix.hpp"

namespace oracle {

using ptai::Matrix;

inline double sqdist(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double d = a(i, c) - b(j, c);
        s += d * d;
    }
    return s;
}

/// Minimum-cost assignment by exhaustive search over permutations, cost |a_i - b_j|^p.
inline double assignment_wasserstein(const Matrix& a, const Matrix& b, int p) {
    const std::size_t n = a.rows();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) cost += std::pow(std::sqrt(sqdist(a, i, b, perm[i])), p);
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow(best / static_cast<double>(n), 1.0 / p);
}

/// Biased HSIC with Gaussian kernels, written as explicit loops over
/// K, L and the centering matrix H.
inline double hsic(const Matrix& x, const Matrix& y, double sx, double sy) {
    const std::size_t n = x.rows();
    std::vector<std::vector<double>> k(n, std::vector<double>(n)), l(n, std::vector<double>(n)),
        h(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            k[i][j] = std::exp(-sqdist(x, i, x, j) / (2.0 * sx * sx));
            l[i][j] = std::exp(-sqdist(y, i, y, j) / (2.0 * sy * sy));
            h[i][j] = (i == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(n);
        }
    auto mul = [n](const auto& a, const auto& b) {
        std::vector<std::vector<double>> c(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t m = 0; m < n; ++m) c[i][j] += a[i][m] * b[m][j];
        return c;
    };
    const auto khl = mul(mul(mul(k, h), l), h);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += khl[i][i];
    return trace / static_cast<double>((n - 1) * (n - 1));
}

/// Softmax cross-entropy averaged over rows, one row at a time.
inline double softmax_ce(const Matrix& logits, const std::vector<std::size_t>& labels) {
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        double z = 0.0;
        for (std::size_t c = 0; c < logits.cols(); ++c) z += std::exp(logits(r, c));
        total += std::log(z) - logits(r, labels[r]);
    }
    return total / static_cast<double>(logits.rows());
}

/// Two-layer ReLU network evaluated with scalar loops.
inline std::vector<double> two_layer(const Matrix& w1, const Matrix& b1, const Matrix& w2, const Matrix& b2,
                                     const std::vector<double>& x) {
    std::vector<double> h(w1.rows());
    for (std::size_t i = 0; i < w1.rows(); ++i) {
        double a = b1(0, i);
        for (std::size_t j = 0; j < x.size(); ++j) a += w1(i, j) * x[j];
        h[i] = a > 0.0 ? a : 0.0;
    }
    std::vector<double> y(w2.rows());
    for (std::size_t i = 0; i < w2.rows(); ++i) {
        double a = b2(0, i);
        for (std::size_t j = 0; j < h.size(); ++j) a += w2(i, j) * h[j];
        y[i] = a;
    }
    return y;
}

/// Collision rate by brute-force nearest clean neighbour.
inline double collision(const Matrix& clean, const std::vector<std::size_t>& labels, const Matrix& aug,
                        const std::vector<std::size_t>& source) {
    std::size_t hits = 0;
    for (std::size_t r = 0; r < aug.rows(); ++r) {
        const std::size_t own = labels[source[r]];
        double best_own = std::numeric_limits<double>::infinity(), best_other = best_own;
        for (std::size_t i = 0; i < clean.rows(); ++i) {
            const double d = sqdist(aug, r, clean, i);
            if (labels[i] == own) best_own = std::min(best_own, d);
            else best_other = std::min(best_other, d);
        }
        if (best_other < best_own) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(aug.rows());
}

}  // namespace oracle
