#pragma once

#include <cmath>
#include <vector>

#include "ptai/core/rng.hpp"
#include "ptai/losses/losses.hpp"
#include "ptai/nn/mlp.hpp"

namespace fixture {

using ptai::Matrix;

inline Matrix gaussian(ptai::RngStream& r, std::size_t n, std::size_t d, double scale = 1.0) {
    Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = scale * r.normal();
    return m;
}

/// Exact identity on all of R^d: relu(x) - relu(-x).
inline ptai::nn::Mlp identity_net(std::size_t d) {
    Matrix w1(2 * d, d), w2(d, 2 * d);
    for (std::size_t i = 0; i < d; ++i) {
        w1(i, i) = 1.0;
        w1(d + i, i) = -1.0;
        w2(i, i) = 1.0;
        w2(i, d + i) = -1.0;
    }
    return ptai::nn::Mlp({{w1, Matrix(1, 2 * d)}, {w2, Matrix(1, d)}});
}

/// Linear map x -> x * a^T through the same relu pair trick.
inline ptai::nn::Mlp linear_net(const Matrix& a) {
    const std::size_t d = a.cols();
    Matrix w1(2 * d, d), w2(a.rows(), 2 * d);
    for (std::size_t i = 0; i < d; ++i) {
        w1(i, i) = 1.0;
        w1(d + i, i) = -1.0;
    }
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < d; ++c) {
            w2(r, c) = a(r, c);
            w2(r, d + c) = -a(r, c);
        }
    return ptai::nn::Mlp({{w1, Matrix(1, 2 * d)}, {w2, Matrix(1, a.rows())}});
}

/// Seeded random orthogonal matrix from the Q factor of a Gaussian matrix.
inline Matrix random_orthogonal(std::size_t d, ptai::RngStream r) {
    Matrix q = gaussian(r, d, d);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) dot += q(i, j) * q(i, k);
            for (std::size_t i = 0; i < d; ++i) q(i, j) -= dot * q(i, k);
        }
        double n = 0.0;
        for (std::size_t i = 0; i < d; ++i) n += q(i, j) * q(i, j);
        n = std::sqrt(n);
        for (std::size_t i = 0; i < d; ++i) q(i, j) /= n;
    }
    return q;
}

inline ptai::losses::AugmentedBatch batch(Matrix clean, Matrix aug, std::size_t s) {
    ptai::losses::AugmentedBatch b;
    b.raw = clean;
    b.clean = std::move(clean);
    b.augmented = std::move(aug);
    b.s = s;
    for (std::size_t i = 0; i < b.clean.rows(); ++i) {
        b.labels.push_back(0);
        b.source.push_back(i);
    }
    return b;
}

/// Each clean row repeated s times.
inline Matrix repeat_rows(const Matrix& clean, std::size_t s) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < clean.rows(); ++i)
        for (std::size_t k = 0; k < s; ++k) idx.push_back(i);
    return gather_rows(clean, idx);
}

}  // namespace fixture
